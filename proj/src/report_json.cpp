// Copyright 2026-present the patsim project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patsim/report_json.hpp"

namespace patsim {

using nlohmann::json;

json to_json(const NeighborList &list, std::optional<double> runtime_seconds) {
  json j;
  j["query_id"] = list.query_id ? json(*list.query_id) : json(nullptr);
  j["metric"] = std::string(metric_name(list.metric));
  json results = json::array();
  for (const auto &e : list.entries) {
    results.push_back({{"patent_id", e.patent_id}, {"score", e.score}});
  }
  j["results"] = std::move(results);
  if (runtime_seconds) j["runtime_seconds"] = *runtime_seconds;
  return j;
}

json to_json(const PredictionResult &r, const CorpusStore &store) {
  json j;
  j["query_id"] = r.query_id ? json(*r.query_id) : json(nullptr);
  j["k"] = r.k;
  j["weighting"] = std::string(weighting_name(r.weighting));
  j["predicted"] = r.predicted;
  json ranking = json::array();
  for (const auto &s : r.ranking) {
    ranking.push_back({{"label", s.label},
                       {"vote_fraction", s.vote_fraction},
                       {"calibrated", s.calibrated}});
  }
  j["ranking"] = std::move(ranking);
  json neighbors = json::array();
  for (const auto &n : r.neighbors.entries) {
    json labels = json::array();
    for (const auto &c : store.record(n.record_index).labels) {
      labels.push_back(c.str());
    }
    neighbors.push_back(
        {{"patent_id", n.patent_id}, {"score", n.score}, {"labels", labels}});
  }
  j["neighbors"] = std::move(neighbors);
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

json to_json(const MetricsReport &r) {
  json top = json::object();
  for (const auto &[n, v] : r.top_n_accuracy) top[std::to_string(n)] = v;
  json j = {
      {"micro", {{"precision", r.micro_precision},
                 {"recall", r.micro_recall},
                 {"f1", r.micro_f1}}},
      {"macro", {{"precision", r.macro_precision},
                 {"recall", r.macro_recall},
                 {"f1", r.macro_f1},
                 {"excluded_labels", r.macro_excluded_labels}}},
      {"example", {{"precision", r.example_precision},
                   {"recall", r.example_recall},
                   {"f1", r.example_f1}}},
      {"subset_accuracy", r.subset_accuracy},
      {"jaccard_accuracy", r.jaccard_accuracy},
      {"top_n_accuracy", top},
      {"instances", r.instance_count},
      {"labels", r.label_count},
  };
  j["k"] = r.k ? json(*r.k) : json(nullptr);
  j["threshold"] = r.threshold ? json(*r.threshold) : json(nullptr);
  return j;
}

json to_json(const SamplingReport &r) {
  return {{"scorer", r.scorer},
          {"seed", r.seed},
          {"total_pairs", r.total_pairs},
          {"candidate_count", r.candidate_count},
          {"exhaustive_candidates", r.exhaustive_candidates},
          {"target", r.target},
          {"selected", r.selected},
          {"shortfall", r.target > r.selected && r.selected < r.total_pairs
                            ? r.target - r.selected
                            : 0},
          {"bin_histogram_candidates", r.candidate_histogram},
          {"bin_histogram_sampled", r.sampled_histogram},
          {"warnings", r.warnings}};
}

json to_json(const IngestReport &r) {
  return {{"lines_read", r.lines_read},
          {"records", r.records},
          {"duplicates_dropped", r.duplicates_dropped},
          {"duplicate_ids", r.duplicate_ids}};
}

json to_json(const FilterReport &r) {
  return {{"min_support", r.min_support},
          {"removed_labels", r.removed_labels},
          {"dropped_records", r.dropped_records},
          {"remaining_classes", r.remaining_classes}};
}

json to_json(const LabelDistribution &d, bool include_counts) {
  json j = {{"records", d.records},
            {"labels", d.counts.size()},
            {"total_assignments", d.total_assignments},
            {"min_count", d.min_count},
            {"max_count", d.max_count},
            {"mean_count", d.mean_count},
            {"median_count", d.median_count},
            {"mean_labels_per_record", d.mean_labels_per_record}};
  if (include_counts) j["counts"] = d.counts;
  return j;
}

}  // namespace patsim
