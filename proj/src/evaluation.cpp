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

#include "patsim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "patsim/common.hpp"

namespace patsim {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double harmonic(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::size_t intersection_size(const LabelSet &a, const LabelSet &b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

void check_lengths(std::size_t truths, std::size_t other) {
  if (truths != other) {
    throw Error("length mismatch: " + std::to_string(truths) +
                " truths vs " + std::to_string(other) + " predictions");
  }
  if (truths == 0) throw Error("nothing to score");
}

LabelSet label_set(const PatentRecord &r) {
  LabelSet s;
  for (const auto &c : r.labels) s.insert(c.str());
  return s;
}

EvalRun run_against(const NeighborBackend &backend, const CorpusStore &test,
                    const EvalOptions &options, bool exclude_self) {
  const std::size_t n = test.size();
  EvalRun run;
  run.truths.resize(n);
  run.predictions.resize(n);
  run.rankings.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const auto &rec = test.record(i);
    std::optional<std::string> exclude;
    if (exclude_self) exclude = rec.patent_id;
    const auto result =
        predict(backend, test.vector(i), options.predict, exclude);
    run.truths[i] = label_set(rec);
    run.predictions[i] =
        LabelSet(result.predicted.begin(), result.predicted.end());
    run.rankings[i].reserve(result.ranking.size());
    for (const auto &ls : result.ranking) run.rankings[i].push_back(ls.label);
  });
  run.report = score(run.truths, run.predictions);
  for (auto top : options.top_ns) {
    run.report.top_n_accuracy[top] =
        top_n_accuracy(run.truths, run.rankings, top);
  }
  run.report.k = options.predict.k;
  run.report.threshold = options.predict.threshold;
  return run;
}

void check_split(const CorpusStore &train, const CorpusStore &test) {
  if (train.empty() || test.empty()) throw Error("empty split");
  if (train.dim() != test.dim()) {
    throw Error("dimension mismatch: train " + std::to_string(train.dim()) +
                ", test " + std::to_string(test.dim()));
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MetricsReport score(const std::vector<LabelSet> &truths,
                    const std::vector<LabelSet> &predictions) {
  check_lengths(truths.size(), predictions.size());
  MetricsReport rep;
  rep.instance_count = truths.size();

  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
    bool in_truth = false;
  };
  std::map<std::string, Counts> per_label;
  std::size_t tp = 0, fp = 0, fn = 0;
  double ex_p = 0.0, ex_r = 0.0, ex_f = 0.0, subset = 0.0, jaccard = 0.0;

  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto &y = truths[i];
    const auto &yhat = predictions[i];
    if (y.empty()) {
      throw Error("empty truth set at index " + std::to_string(i));
    }
    const std::size_t inter = intersection_size(y, yhat);
    tp += inter;
    fp += yhat.size() - inter;
    fn += y.size() - inter;
    for (const auto &l : y) {
      auto &c = per_label[l];
      c.in_truth = true;
      if (yhat.count(l)) {
        ++c.tp;
      } else {
        ++c.fn;
      }
    }
    for (const auto &l : yhat) {
      if (!y.count(l)) ++per_label[l].fp;
    }
    const double di = static_cast<double>(inter);
    ex_p += ratio(di, static_cast<double>(yhat.size()));
    ex_r += ratio(di, static_cast<double>(y.size()));
    ex_f += ratio(2.0 * di, static_cast<double>(y.size() + yhat.size()));
    subset += (y == yhat) ? 1.0 : 0.0;
    jaccard += ratio(di, static_cast<double>(y.size() + yhat.size() - inter));
  }

  const double n = static_cast<double>(truths.size());
  rep.micro_precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  rep.micro_recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  rep.micro_f1 = harmonic(rep.micro_precision, rep.micro_recall);
  rep.example_precision = ex_p / n;
  rep.example_recall = ex_r / n;
  rep.example_f1 = ex_f / n;
  rep.subset_accuracy = subset / n;
  rep.jaccard_accuracy = jaccard / n;

  double mp = 0.0, mr = 0.0, mf = 0.0;
  for (const auto &[_, c] : per_label) {
    if (!c.in_truth) {
      ++rep.macro_excluded_labels;
      continue;
    }
    ++rep.label_count;
    const double p = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    const double r = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    mp += p;
    mr += r;
    mf += harmonic(p, r);
  }
  const double labels = static_cast<double>(rep.label_count);
  rep.macro_precision = ratio(mp, labels);
  rep.macro_recall = ratio(mr, labels);
  rep.macro_f1 = ratio(mf, labels);
  return rep;
}

double top_n_accuracy(const std::vector<LabelSet> &truths,
                      const std::vector<std::vector<std::string>> &rankings,
                      std::size_t n) {
  check_lengths(truths.size(), rankings.size());
  if (n == 0) throw Error("n must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto &r = rankings[i];
    const std::size_t m = std::min(n, r.size());
    for (std::size_t j = 0; j < m; ++j) {
      if (truths[i].count(r[j])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(truths.size());
}

LabelSet to_sections(const LabelSet &labels) {
  LabelSet out;
  for (const auto &l : labels) {
    if (!l.empty()) out.insert(l.substr(0, 1));
  }
  return out;
}

MetricsReport section_level_metrics(const std::vector<LabelSet> &truths,
                                    const std::vector<LabelSet> &predictions) {
  check_lengths(truths.size(), predictions.size());
  std::vector<LabelSet> t, p;
  t.reserve(truths.size());
  p.reserve(predictions.size());
  for (const auto &s : truths) t.push_back(to_sections(s));
  for (const auto &s : predictions) p.push_back(to_sections(s));
  return score(t, p);
}

std::string backend_name(Backend b) {
  return b == Backend::kExact ? "exact" : "ann";
}

Backend parse_backend(const std::string &name) {
  if (name == "exact") return Backend::kExact;
  if (name == "ann") return Backend::kAnn;
  throw Error("unknown backend \"" + name + "\"");
}

EvalRun evaluate_split_run(const CorpusStore &train, const CorpusStore &test,
                           const EvalOptions &options) {
  check_split(train, test);
  if (options.backend == Backend::kAnn) {
    const auto index = AnnIndex::build(train, options.ann);
    AnnBackend backend(index, train, options.search_k);
    return run_against(backend, test, options, false);
  }
  ExactBackend backend(train);
  return run_against(backend, test, options, false);
}

MetricsReport evaluate_split(const CorpusStore &train, const CorpusStore &test,
                             const EvalOptions &options) {
  return evaluate_split_run(train, test, options).report;
}

EvalRun evaluate_loo_run(const CorpusStore &corpus,
                         const EvalOptions &options) {
  if (corpus.size() < 2) throw Error("leave-one-out needs at least 2 records");
  if (options.backend == Backend::kAnn) {
    const auto index = AnnIndex::build(corpus, options.ann);
    AnnBackend backend(index, corpus, options.search_k);
    return run_against(backend, corpus, options, true);
  }
  ExactBackend backend(corpus);
  return run_against(backend, corpus, options, true);
}

std::vector<MetricsReport> sweep_k(const CorpusStore &train,
                                   const CorpusStore &test,
                                   const std::vector<std::size_t> &ks,
                                   const EvalOptions &options) {
  check_split(train, test);
  if (ks.empty()) throw Error("sweep needs at least one k");
  for (auto k : ks) {
    if (k == 0) throw Error("k must be at least 1");
  }
  std::optional<AnnIndex> index;
  std::unique_ptr<NeighborBackend> backend;
  if (options.backend == Backend::kAnn) {
    index = AnnIndex::build(train, options.ann);
    backend = std::make_unique<AnnBackend>(*index, train, options.search_k);
  } else {
    backend = std::make_unique<ExactBackend>(train);
  }
  std::vector<MetricsReport> rows;
  rows.reserve(ks.size());
  for (auto k : ks) {
    EvalOptions row = options;
    row.predict.k = k;
    rows.push_back(run_against(*backend, test, row, false).report);
  }
  return rows;
}

std::pair<CorpusStore, CorpusStore> split_holdout(const CorpusStore &corpus,
                                                  double test_fraction,
                                                  std::uint64_t seed) {
  if (corpus.size() < 2) throw Error("holdout split needs at least 2 records");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("test fraction must lie in (0, 1)");
  }
  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);
  deterministic_shuffle(order, rng);
  auto m = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  m = std::clamp<std::size_t>(m, 1, n - 1);
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < m; ++i) is_test[order[i]] = true;
  std::vector<PatentRecord> train, test;
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? test : train).push_back(corpus.record(i));
  }
  return {CorpusStore(std::move(train), corpus.dim()),
          CorpusStore(std::move(test), corpus.dim())};
}

std::vector<std::string> check_report(const MetricsReport &r) {
  std::vector<std::string> bad;
  auto unit = [&](const char *name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      bad.push_back(std::string(name) + " outside [0,1]: " + fmt_double(v));
    }
  };
  unit("micro_precision", r.micro_precision);
  unit("micro_recall", r.micro_recall);
  unit("micro_f1", r.micro_f1);
  unit("macro_precision", r.macro_precision);
  unit("macro_recall", r.macro_recall);
  unit("macro_f1", r.macro_f1);
  unit("example_precision", r.example_precision);
  unit("example_recall", r.example_recall);
  unit("example_f1", r.example_f1);
  unit("subset_accuracy", r.subset_accuracy);
  unit("jaccard_accuracy", r.jaccard_accuracy);
  for (const auto &[n, v] : r.top_n_accuracy) unit("top_n_accuracy", v);

  const double p = r.micro_precision, rc = r.micro_recall;
  const double expect = p + rc == 0.0 ? 0.0 : 2.0 * p * rc / (p + rc);
  if (std::abs(r.micro_f1 - expect) > 1e-12) {
    bad.push_back("micro_f1 is not the harmonic mean of micro P and R");
  }
  double prev = -1.0;
  for (const auto &[n, v] : r.top_n_accuracy) {
    if (v < prev) bad.push_back("top_n_accuracy decreases at n=" + std::to_string(n));
    prev = v;
  }
  if (r.subset_accuracy > r.example_f1 + 1e-12) {
    bad.push_back("subset_accuracy exceeds example_f1");
  }
  return bad;
}

std::string metrics_csv_header() {
  return "k,threshold,instances,labels,micro_precision,micro_recall,micro_f1,"
         "macro_precision,macro_recall,macro_f1,example_precision,"
         "example_recall,example_f1,subset_accuracy,jaccard_accuracy,"
         "top1_accuracy,top5_accuracy";
}

std::string metrics_csv_row(const MetricsReport &r) {
  auto opt_top = [&](std::size_t n) {
    auto it = r.top_n_accuracy.find(n);
    return it == r.top_n_accuracy.end() ? std::string() : fmt_double(it->second);
  };
  std::string row;
  row += r.k ? std::to_string(*r.k) : "";
  row += ",";
  row += r.threshold ? fmt_double(*r.threshold) : "";
  for (double v : {static_cast<double>(r.instance_count),
                   static_cast<double>(r.label_count)}) {
    row += "," + fmt_double(v);
  }
  for (double v : {r.micro_precision, r.micro_recall, r.micro_f1,
                   r.macro_precision, r.macro_recall, r.macro_f1,
                   r.example_precision, r.example_recall, r.example_f1,
                   r.subset_accuracy, r.jaccard_accuracy}) {
    row += "," + fmt_double(v);
  }
  row += "," + opt_top(1) + "," + opt_top(5);
  return row;
}

}  // namespace patsim
