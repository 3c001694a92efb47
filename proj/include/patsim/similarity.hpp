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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patsim/corpus.hpp"

namespace patsim {

enum class Metric { kCosine, kEuclidean };

std::string_view metric_name(Metric m);
/// Accepts "cosine" or "euclidean".
Metric parse_metric(std::string_view name);

/// Dot product accumulated in double.
double dot(std::span<const float> a, std::span<const float> b);

/// Cosine similarity in [-1, 1]. Throws on length mismatch or a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

/// L2 distance. Throws on length mismatch.
double euclidean(std::span<const float> a, std::span<const float> b);

struct Neighbor {
  std::string patent_id;
  double score = 0.0;  // cosine similarity, or euclidean distance
  std::size_t record_index = 0;

  friend bool operator==(const Neighbor &, const Neighbor &) = default;
};

struct NeighborList {
  std::optional<std::string> query_id;
  Metric metric = Metric::kCosine;
  std::vector<Neighbor> entries;

  friend bool operator==(const NeighborList &, const NeighborList &) = default;
};

/// Ranking order shared by exact and approximate search: higher cosine (or
/// lower distance) first, ties by ascending patent_id.
bool ranks_before(Metric metric, const Neighbor &a, const Neighbor &b);

/// Exact k-best search with a bounded heap, O(N log k). Returns all records
/// when k exceeds the number of candidates. `exclude_id` is removed before
/// selection and recorded as the list's query_id.
NeighborList top_k_exact(const CorpusStore &store, std::span<const float> query,
                         std::size_t k,
                         const std::optional<std::string> &exclude_id = {},
                         Metric metric = Metric::kCosine);

/// Element i equals top_k_exact(store, queries[i], ...). Queries run in
/// parallel; output order follows input order.
std::vector<NeighborList> batch_top_k(
    const CorpusStore &store, std::span<const std::vector<float>> queries,
    std::size_t k, Metric metric = Metric::kCosine);

/// Scores one stored record against a query whose norm is already known.
/// Shared by exact search and ANN reranking so both produce identical scores.
double score_record(const CorpusStore &store, std::size_t index,
                    std::span<const float> query, double query_norm,
                    Metric metric);

}  // namespace patsim
