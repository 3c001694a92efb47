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

#include "patsim/knn_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "patsim/common.hpp"

namespace patsim {

NeighborList AnnBackend::search(
    std::span<const float> query, std::size_t k,
    const std::optional<std::string> &exclude_id) const {
  std::size_t sk = search_k_.value_or(
      default_search_k(k, index_.params().n_trees));
  // One extra slot so self-exclusion cannot cost a neighbor.
  sk = std::max(sk, k + (exclude_id ? 1 : 0));
  return index_.query(store_, query, k, sk, exclude_id);
}

std::string_view weighting_name(Weighting w) {
  return w == Weighting::kSimilarity ? "similarity" : "uniform";
}

Weighting parse_weighting(std::string_view name) {
  if (name == "similarity") return Weighting::kSimilarity;
  if (name == "uniform") return Weighting::kUniform;
  throw Error("unknown weighting \"" + std::string(name) + "\"");
}

double calibrate(double vote_fraction, double threshold, double gamma) {
  return 1.0 / (1.0 + std::exp(-gamma * (vote_fraction - threshold)));
}

std::vector<std::string> select_labels(std::span<const LabelScore> ranking,
                                       double threshold) {
  std::vector<std::string> out;
  for (const auto &s : ranking) {
    if (s.vote_fraction >= threshold) out.push_back(s.label);
  }
  if (out.empty() && !ranking.empty()) out.push_back(ranking.front().label);
  std::sort(out.begin(), out.end());
  return out;
}

PredictionResult vote(const NeighborList &neighbors, const CorpusStore &store,
                      const PredictOptions &options) {
  if (neighbors.entries.empty()) throw Error("no neighbors to vote with");
  if (options.gamma <= 0.0) throw Error("gamma must be positive");
  PredictionResult result;
  result.query_id = neighbors.query_id;
  result.k = options.k;
  result.weighting = options.weighting;
  result.neighbors = neighbors;

  std::vector<double> weights;
  weights.reserve(neighbors.entries.size());
  for (const auto &n : neighbors.entries) {
    weights.push_back(options.weighting == Weighting::kUniform
                          ? 1.0
                          : std::clamp(n.score, 0.0, 1.0));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (total == 0.0) {
    result.warnings.push_back(
        "all neighbor similarities clamp to 0; using uniform weights");
    result.weighting = Weighting::kUniform;
    std::fill(weights.begin(), weights.end(), 1.0);
    total = static_cast<double>(weights.size());
  }
  result.total_weight = total;

  const auto &vocab = store.vocabulary();
  std::map<std::uint32_t, double> raw;
  for (std::size_t i = 0; i < neighbors.entries.size(); ++i) {
    for (auto li : store.label_indices(neighbors.entries[i].record_index)) {
      raw[li] += weights[i];
    }
  }

  result.ranking.reserve(raw.size());
  for (const auto &[li, s] : raw) {
    LabelScore ls;
    ls.label = vocab.code(li).str();
    ls.raw = s;
    ls.vote_fraction = std::clamp(s / total, 0.0, 1.0);
    ls.calibrated = calibrate(ls.vote_fraction, options.threshold, options.gamma);
    result.ranking.push_back(std::move(ls));
  }
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [](const LabelScore &a, const LabelScore &b) {
                     if (a.vote_fraction != b.vote_fraction) {
                       return a.vote_fraction > b.vote_fraction;
                     }
                     return a.label < b.label;
                   });
  result.predicted = select_labels(result.ranking, options.threshold);
  return result;
}

PredictionResult predict(const NeighborBackend &backend,
                         std::span<const float> query,
                         const PredictOptions &options,
                         const std::optional<std::string> &exclude_id) {
  const auto &store = backend.store();
  if (store.empty()) throw Error("empty corpus");
  if (options.k == 0) throw Error("k must be at least 1");
  std::size_t available = store.size();
  if (exclude_id && store.find(*exclude_id)) --available;
  if (available == 0) throw Error("no records left after exclusion");

  std::vector<std::string> warnings;
  std::size_t k = options.k;
  if (k > available) {
    warnings.push_back("k=" + std::to_string(k) + " exceeds the " +
                       std::to_string(available) +
                       " available records; using all of them");
    k = available;
  }
  auto result = vote(backend.search(query, k, exclude_id), store, options);
  warnings.insert(warnings.end(), result.warnings.begin(),
                  result.warnings.end());
  result.warnings = std::move(warnings);
  return result;
}

std::vector<std::string> predict_topn(const NeighborBackend &backend,
                                      std::span<const float> query,
                                      std::size_t n,
                                      const PredictOptions &options) {
  if (n == 0) throw Error("n must be at least 1");
  const auto result = predict(backend, query, options);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, result.ranking.size()); ++i) {
    out.push_back(result.ranking[i].label);
  }
  return out;
}

std::vector<PredictionResult> predict_batch_loo(const NeighborBackend &backend,
                                                const PredictOptions &options) {
  const auto &store = backend.store();
  if (store.size() < 2) {
    throw Error("leave-one-out needs at least 2 records");
  }
  std::vector<PredictionResult> out(store.size());
  parallel_for(store.size(), [&](std::size_t i) {
    out[i] = predict(backend, store.vector(i), options,
                     store.record(i).patent_id);
  });
  return out;
}

}  // namespace patsim
