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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patsim/corpus.hpp"

namespace patsim {

/// n * (n - 1) / 2.
std::uint64_t count_pairs(std::uint64_t n);

struct SentencePair {
  std::uint32_t a = 0;  // a < b
  std::uint32_t b = 0;
  std::optional<double> silver_score;

  friend bool operator==(const SentencePair &, const SentencePair &) = default;
};

/// Cheap symmetric similarity over items 0..size()-1, in [0, 1].
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual std::size_t size() const = 0;
  virtual double score(std::size_t a, std::size_t b) const = 0;
  /// Up to m most similar other items of i, best first. Scorers that cannot
  /// answer this return an empty list; sampling then relies on random pairs.
  virtual std::vector<std::size_t> nearest(std::size_t i, std::size_t m) const {
    (void)i;
    (void)m;
    return {};
  }
  virtual std::string_view name() const = 0;
};

/// Lowercased ASCII alphanumeric runs; bytes >= 0x80 are kept inside
/// tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// TF-IDF cosine over the given texts. tf is the raw count and
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1, so terms present in every text
/// still carry weight. Texts with no tokens score 0 against everything.
class TfidfScorer final : public PairScorer {
 public:
  explicit TfidfScorer(std::span<const std::string> texts);
  std::size_t size() const override { return docs_.size(); }
  double score(std::size_t a, std::size_t b) const override;
  std::vector<std::size_t> nearest(std::size_t i, std::size_t m) const override;
  std::string_view name() const override { return "lexical_tfidf_cosine"; }

 private:
  struct Entry {
    std::uint32_t term;
    double weight;
  };
  std::vector<std::vector<Entry>> docs_;  // sorted by term
  std::vector<double> norms2_;  // squared L2 norms
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
};

/// max(0, cosine) between stored vectors.
class EmbeddingScorer final : public PairScorer {
 public:
  explicit EmbeddingScorer(const CorpusStore &store) : store_(store) {}
  std::size_t size() const override { return store_.size(); }
  double score(std::size_t a, std::size_t b) const override;
  std::vector<std::size_t> nearest(std::size_t i, std::size_t m) const override;
  std::string_view name() const override { return "embedding_cosine"; }

 private:
  const CorpusStore &store_;
};

/// Wraps a caller-supplied function, e.g. a cross-encoder bridge.
class ExternalScorer final : public PairScorer {
 public:
  ExternalScorer(std::size_t n, std::function<double(std::size_t, std::size_t)> fn)
      : n_(n), fn_(std::move(fn)) {}
  std::size_t size() const override { return n_; }
  double score(std::size_t a, std::size_t b) const override { return fn_(a, b); }
  std::string_view name() const override { return "external"; }

 private:
  std::size_t n_;
  std::function<double(std::size_t, std::size_t)> fn_;
};

struct SamplingPlan {
  std::size_t target_count = 3432;
  std::size_t bins = 5;
  std::uint64_t seed = 42;
  /// Above this many pairs, candidates are no longer fully enumerated.
  std::uint64_t candidate_cap = 2'000'000;
  /// Capped mode: nearest neighbors per item added as candidates.
  std::size_t neighbors_per_item = 10;
  /// Capped mode: uniform random candidates, as a multiple of target_count.
  std::size_t random_factor = 4;
};

struct SamplingReport {
  std::string scorer;
  std::uint64_t seed = 0;
  std::uint64_t total_pairs = 0;
  std::uint64_t candidate_count = 0;
  bool exhaustive_candidates = false;
  std::size_t target = 0;
  std::size_t selected = 0;
  std::vector<std::size_t> candidate_histogram;
  std::vector<std::size_t> sampled_histogram;
  std::vector<std::string> warnings;
};

struct SamplingResult {
  std::vector<SentencePair> pairs;  // sorted by (a, b)
  SamplingReport report;
};

/// Score-balanced pair sampling.
///
/// Every candidate pair is scored with the plan's cheap scorer and placed in
/// one of `bins` equal-width score bins over [0, 1]. Each bin is shuffled
/// with a seed derived from plan.seed, then bins are visited round-robin,
/// taking one unused pair per non-empty bin per round, until the target is
/// met. A target at or above the total pair count returns every pair.
/// Throws when fewer distinct candidates exist than the target.
SamplingResult sample_pairs(const PairScorer &scorer, const SamplingPlan &plan);

/// Bin of a score in [0, 1] for `bins` equal-width bins.
std::size_t score_bin(double score, std::size_t bins);

enum class OnScorerError { kAbort, kSkip };

struct LabelingReport {
  std::size_t labeled = 0;
  std::size_t clamped = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Attaches silver scores. Out-of-range scores are clamped to [0, 1] with a
/// warning. A throwing scorer aborts (rethrown naming the pair) or the pair
/// is skipped, per `on_error`.
std::vector<SentencePair> label_pairs(
    std::span<const SentencePair> pairs,
    const std::function<double(std::size_t, std::size_t)> &scorer,
    OnScorerError on_error = OnScorerError::kAbort,
    LabelingReport *report = nullptr);

/// Tab-separated STS training file: a `score\tsentence1\tsentence2` header,
/// then one row per pair with score = silver * 5 printed to 4 decimals.
/// Tab, CR and LF runs inside sentences become a single space.
void export_sts(std::span<const SentencePair> pairs,
                std::span<const std::string> texts,
                const std::filesystem::path &path);

std::string sanitize_sts_field(std::string_view text);

struct StsRow {
  double score = 0.0;  // 0-5 scale as written
  std::string sentence1;
  std::string sentence2;
};

std::vector<StsRow> read_sts(const std::filesystem::path &path);

}  // namespace patsim
