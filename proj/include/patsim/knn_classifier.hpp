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

#include "patsim/ann_index.hpp"
#include "patsim/corpus.hpp"
#include "patsim/similarity.hpp"

namespace patsim {

/// Source of cosine neighbors for the classifier. Implementations keep
/// references to their corpus (and index); the caller owns both.
class NeighborBackend {
 public:
  virtual ~NeighborBackend() = default;
  virtual const CorpusStore &store() const = 0;
  virtual NeighborList search(std::span<const float> query, std::size_t k,
                              const std::optional<std::string> &exclude_id)
      const = 0;
  virtual std::string_view name() const = 0;
};

class ExactBackend final : public NeighborBackend {
 public:
  explicit ExactBackend(const CorpusStore &store) : store_(store) {}
  const CorpusStore &store() const override { return store_; }
  NeighborList search(std::span<const float> query, std::size_t k,
                      const std::optional<std::string> &exclude_id)
      const override {
    return top_k_exact(store_, query, k, exclude_id, Metric::kCosine);
  }
  std::string_view name() const override { return "exact"; }

 private:
  const CorpusStore &store_;
};

class AnnBackend final : public NeighborBackend {
 public:
  /// Without an explicit search_k each query uses default_search_k(k, trees).
  AnnBackend(const AnnIndex &index, const CorpusStore &store,
             std::optional<std::size_t> search_k = {})
      : index_(index), store_(store), search_k_(search_k) {}
  const CorpusStore &store() const override { return store_; }
  NeighborList search(std::span<const float> query, std::size_t k,
                      const std::optional<std::string> &exclude_id)
      const override;
  std::string_view name() const override { return "ann"; }

 private:
  const AnnIndex &index_;
  const CorpusStore &store_;
  std::optional<std::size_t> search_k_;
};

enum class Weighting { kSimilarity, kUniform };

std::string_view weighting_name(Weighting w);
Weighting parse_weighting(std::string_view name);

struct PredictOptions {
  std::size_t k = 8;
  Weighting weighting = Weighting::kSimilarity;
  double threshold = 0.5;
  double gamma = 8.0;
};

struct LabelScore {
  std::string label;
  double raw = 0.0;            // s_c: summed weight of neighbors carrying c
  double vote_fraction = 0.0;  // s_c / total weight, in [0, 1]
  double calibrated = 0.0;     // 1 / (1 + exp(-gamma * (fraction - tau)))
};

struct PredictionResult {
  std::optional<std::string> query_id;
  std::size_t k = 0;  // requested k
  Weighting weighting = Weighting::kSimilarity;  // after any fallback
  double total_weight = 0.0;
  /// Every label seen among the neighbors, by vote fraction descending,
  /// ties lexicographic.
  std::vector<LabelScore> ranking;
  /// Labels with vote fraction >= threshold, lexicographic. Never empty:
  /// when nothing clears the threshold it holds the top-ranked label.
  std::vector<std::string> predicted;
  NeighborList neighbors;
  std::vector<std::string> warnings;
};

/// Sigmoid calibration of a vote fraction. Strictly increasing in fraction.
double calibrate(double vote_fraction, double threshold, double gamma);

/// Turns a neighbor list into per-label votes. Similarities are clamped to
/// [0, 1] before weighting; if that leaves zero total weight the vote falls
/// back to uniform weights and records a warning.
PredictionResult vote(const NeighborList &neighbors, const CorpusStore &store,
                      const PredictOptions &options);

/// Applies the threshold rule with the non-empty fallback to a ranking.
std::vector<std::string> select_labels(std::span<const LabelScore> ranking,
                                       double threshold);

PredictionResult predict(const NeighborBackend &backend,
                         std::span<const float> query,
                         const PredictOptions &options = {},
                         const std::optional<std::string> &exclude_id = {});

/// First n labels of the ranking (fewer if fewer labels were seen).
std::vector<std::string> predict_topn(const NeighborBackend &backend,
                                      std::span<const float> query,
                                      std::size_t n,
                                      const PredictOptions &options = {});

/// Classifies every stored record against the rest of the corpus.
std::vector<PredictionResult> predict_batch_loo(
    const NeighborBackend &backend, const PredictOptions &options = {});

}  // namespace patsim
