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

#include "patsim/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "patsim/common.hpp"

namespace patsim {

namespace {

void require_same_length(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error("length mismatch: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  }
}

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

}  // namespace

std::string_view metric_name(Metric m) {
  return m == Metric::kCosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  throw Error("unknown metric \"" + std::string(name) + "\"");
}

double dot(std::span<const float> a, std::span<const float> b) {
  require_same_length(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * b[i];
  }
  return acc;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  require_same_length(a, b);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0.0 || bb == 0.0) throw Error("cosine of a zero vector");
  return clamp_unit(ab / (std::sqrt(aa) * std::sqrt(bb)));
}

double euclidean(std::span<const float> a, std::span<const float> b) {
  require_same_length(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

bool ranks_before(Metric metric, const Neighbor &a, const Neighbor &b) {
  if (a.score != b.score) {
    return metric == Metric::kCosine ? a.score > b.score : a.score < b.score;
  }
  return a.patent_id < b.patent_id;
}

double score_record(const CorpusStore &store, std::size_t index,
                    std::span<const float> query, double query_norm,
                    Metric metric) {
  const auto v = store.vector(index);
  if (metric == Metric::kEuclidean) return euclidean(query, v);
  const double n = store.norm(index);
  if (n == 0.0) {
    throw Error("cosine of a zero vector (record " +
                store.record(index).patent_id + ")");
  }
  return clamp_unit(dot(query, v) / (query_norm * n));
}

NeighborList top_k_exact(const CorpusStore &store, std::span<const float> query,
                         std::size_t k,
                         const std::optional<std::string> &exclude_id,
                         Metric metric) {
  if (store.empty()) throw Error("empty corpus");
  if (k == 0) throw Error("k must be at least 1");
  if (query.size() != store.dim()) {
    throw Error("dimension mismatch: query has " +
                std::to_string(query.size()) + ", corpus has " +
                std::to_string(store.dim()));
  }
  const double qn = std::sqrt(dot(query, query));
  if (metric == Metric::kCosine && qn == 0.0) {
    throw Error("cosine of a zero vector (query)");
  }

  // Max-heap on "ranks later": top() is the worst retained entry.
  auto worse_on_top = [metric](const Neighbor &a, const Neighbor &b) {
    return ranks_before(metric, a, b);
  };
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(worse_on_top)>
      heap(worse_on_top);

  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto &id = store.record(i).patent_id;
    if (exclude_id && id == *exclude_id) continue;
    Neighbor cand{id, score_record(store, i, query, qn, metric), i};
    if (heap.size() < k) {
      heap.push(std::move(cand));
    } else if (ranks_before(metric, cand, heap.top())) {
      heap.pop();
      heap.push(std::move(cand));
    }
  }

  NeighborList out;
  out.query_id = exclude_id;
  out.metric = metric;
  out.entries.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out.entries[i] = heap.top();
    heap.pop();
  }
  return out;
}

std::vector<NeighborList> batch_top_k(
    const CorpusStore &store, std::span<const std::vector<float>> queries,
    std::size_t k, Metric metric) {
  std::vector<NeighborList> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    out[i] = top_k_exact(store, queries[i], k, std::nullopt, metric);
  });
  return out;
}

}  // namespace patsim
