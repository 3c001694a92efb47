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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "patsim/ann_index.hpp"
#include "patsim/corpus.hpp"
#include "patsim/knn_classifier.hpp"

namespace patsim {

using LabelSet = std::set<std::string>;

struct MetricsReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double example_precision = 0.0;
  double example_recall = 0.0;
  double example_f1 = 0.0;
  double subset_accuracy = 0.0;
  double jaccard_accuracy = 0.0;
  std::map<std::size_t, double> top_n_accuracy;
  std::size_t instance_count = 0;
  /// Labels averaged over by the macro scores (labels present in truths).
  std::size_t label_count = 0;
  /// Labels that were only ever predicted, never true; excluded from macro.
  std::size_t macro_excluded_labels = 0;
  std::optional<std::size_t> k;
  std::optional<double> threshold;
};

/// Set-based multi-label metrics.
///
/// Micro scores come from global TP/FP/FN counts, with F1 taken as the
/// harmonic mean of the reported micro P and R. Macro scores average
/// per-label P/R/F1 over labels that occur in the truths. Example-based
/// scores average per-instance P = |Y∩Ŷ|/|Ŷ|, R = |Y∩Ŷ|/|Y| and
/// F1 = 2|Y∩Ŷ|/(|Y|+|Ŷ|). Any 0/0 ratio counts as 0.
MetricsReport score(const std::vector<LabelSet> &truths,
                    const std::vector<LabelSet> &predictions);

/// Fraction of instances whose first n ranked labels hit the truth set.
double top_n_accuracy(const std::vector<LabelSet> &truths,
                      const std::vector<std::vector<std::string>> &rankings,
                      std::size_t n);

/// Maps each label to its CPC section (first character) before scoring.
LabelSet to_sections(const LabelSet &labels);
MetricsReport section_level_metrics(const std::vector<LabelSet> &truths,
                                    const std::vector<LabelSet> &predictions);

enum class Backend { kExact, kAnn };

std::string backend_name(Backend b);
Backend parse_backend(const std::string &name);

struct EvalOptions {
  PredictOptions predict;
  Backend backend = Backend::kExact;
  AnnParams ann;
  std::optional<std::size_t> search_k;
  std::vector<std::size_t> top_ns = {1, 5};
};

/// Everything needed to rescore an evaluation run.
struct EvalRun {
  std::vector<LabelSet> truths;
  std::vector<LabelSet> predictions;
  std::vector<std::vector<std::string>> rankings;
  MetricsReport report;
};

/// Classifies each test record against the train corpus.
EvalRun evaluate_split_run(const CorpusStore &train, const CorpusStore &test,
                           const EvalOptions &options);
MetricsReport evaluate_split(const CorpusStore &train, const CorpusStore &test,
                             const EvalOptions &options);

/// Leave-one-out over a single corpus.
EvalRun evaluate_loo_run(const CorpusStore &corpus, const EvalOptions &options);

/// One report per k, in the order given. An ANN index, when used, is built
/// once and shared across rows.
std::vector<MetricsReport> sweep_k(const CorpusStore &train,
                                   const CorpusStore &test,
                                   const std::vector<std::size_t> &ks,
                                   const EvalOptions &options);

/// Deterministic holdout: shuffles record order with `seed` and moves
/// round(fraction * N) records (at least one, at most N - 1) into test.
std::pair<CorpusStore, CorpusStore> split_holdout(const CorpusStore &corpus,
                                                  double test_fraction,
                                                  std::uint64_t seed);

/// Checks the report-level invariants; returns human-readable violations.
std::vector<std::string> check_report(const MetricsReport &report);

/// Flat CSV for sweep tables. Header and field order are fixed.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport &report);

}  // namespace patsim
