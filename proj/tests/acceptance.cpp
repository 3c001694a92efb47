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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "patsim/ann_index.hpp"
#include "patsim/augmentation.hpp"
#include "patsim/binary_io.hpp"
#include "patsim/corpus.hpp"
#include "patsim/evaluation.hpp"
#include "patsim/knn_classifier.hpp"
#include "patsim/similarity.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace patsim {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<LabelSet> label_sets(const std::vector<std::vector<std::string>> &v) {
  std::vector<LabelSet> out;
  for (const auto &s : v) out.emplace_back(s.begin(), s.end());
  return out;
}

// 1. Exact search against a full-sort oracle.
void exact_search(Outcome &o) {
  const auto t0 = Clock::now();
  auto store = testing::random_store(1000, 64, 101);
  std::mt19937_64 rng(102);
  std::size_t mismatches = 0, checks = 0;
  for (int q = 0; q < 50; ++q) {
    auto v = testing::random_vector(rng, 64);
    for (std::size_t k : {1u, 8u, 20u}) {
      const auto got = top_k_exact(store, v, k);
      const auto want = testing::full_sort_top_k(store, v, k);
      ++checks;
      bool same = got.entries.size() == want.size();
      for (std::size_t i = 0; same && i < want.size(); ++i) {
        same = got.entries[i].patent_id == want[i].id;
      }
      mismatches += !same;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << " checks=" << checks << " mismatches=" << mismatches
           << " seconds=" << fmt(secs);
  o.require(mismatches == 0, "id sequences differ from oracle");
  o.require(secs < 5.0, "runtime >= 5 s");
}

// 2. ANN recall: exhaustive search is exact; clustered recall@10 >= 0.95;
// recall non-decreasing in search_k.
void ann_recall(Outcome &o) {
  struct Instance {
    CorpusStore store;
    std::size_t k;
  };
  std::vector<Instance> small;
  small.push_back({testing::random_store(2000, 32, 201), 10});
  small.push_back({testing::random_store(500, 8, 202), 1});
  small.push_back({testing::cluster_store({}), 20});
  bool exhaustive_exact = true;
  for (const auto &inst : small) {
    auto idx = AnnIndex::build(inst.store, {8, 16, 7});
    auto qs = testing::perturbed_queries(inst.store, 25, 203, 0.3f);
    exhaustive_exact = exhaustive_exact &&
                       recall_vs_exact(idx, inst.store, qs, inst.k, inst.store.size()) == 1.0;
  }
  o.require(exhaustive_exact, "search_k = N recall != 1.0");

  const auto t0 = Clock::now();
  auto store = testing::cluster_store(testing::recall_cluster_params());
  auto idx = AnnIndex::build(store, {16, 32, 42});
  auto qs = testing::perturbed_queries(store, 100, 77);
  const double r50 = recall_vs_exact(idx, store, qs, 10, 50);
  const double r200 = recall_vs_exact(idx, store, qs, 10, 200);
  const double r1000 = recall_vs_exact(idx, store, qs, 10, 1000);
  const double full = recall_vs_exact(idx, store, qs, 10, store.size());
  const double secs = seconds_since(t0);
  o.detail << " recall@10{50,200,1000}=" << fmt(r50) << "," << fmt(r200) << ","
           << fmt(r1000) << " exhaustive=" << fmt(full) << " seconds=" << fmt(secs);
  o.require(full == 1.0, "clustered search_k = N recall != 1.0");
  o.require(r1000 >= 0.95, "recall@10 at search_k=1000 below 0.95");
  o.require(r50 <= r200 && r200 <= r1000, "recall decreases with search_k");
  o.require(secs < 60.0, "build+query >= 60 s");
}

// 3. Metrics against naive confusion counting.
void metrics_oracle(Outcome &o) {
  std::mt19937_64 rng(301);
  std::bernoulli_distribution coin(0.25);
  std::uniform_int_distribution<std::size_t> pick(0, 11);
  std::vector<std::vector<std::string>> t(200), p(200);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t l = 0; l < 12; ++l) {
      if (coin(rng)) t[i].push_back(testing::make_label(l));
      if (coin(rng)) p[i].push_back(testing::make_label(l));
    }
    if (t[i].empty()) t[i].push_back(testing::make_label(pick(rng)));
  }
  const auto r = score(label_sets(t), label_sets(p));
  const auto n = testing::naive_metrics(t, p);
  const double diffs[] = {r.micro_precision - n.micro_p, r.micro_recall - n.micro_r,
                          r.micro_f1 - n.micro_f1,      r.macro_precision - n.macro_p,
                          r.macro_recall - n.macro_r,   r.macro_f1 - n.macro_f1,
                          r.example_precision - n.ex_p, r.example_recall - n.ex_r,
                          r.example_f1 - n.ex_f1};
  double worst = 0;
  for (double d : diffs) worst = std::max(worst, std::abs(d));
  const double harmonic = 2 * r.micro_precision * r.micro_recall /
                          (r.micro_precision + r.micro_recall);

  LabelSet tt, pp;
  for (int i = 0; i < 370; ++i) tt.insert("t" + std::to_string(i));
  for (int i = 0; i < 222; ++i) pp.insert("t" + std::to_string(i));
  for (int i = 0; i < 78; ++i) pp.insert("f" + std::to_string(i));
  const auto anchor = score({tt}, {pp});

  o.detail << " max_oracle_diff=" << fmt(worst)
           << " harmonic_gap=" << fmt(std::abs(r.micro_f1 - harmonic))
           << " anchor_P=" << fmt(anchor.micro_precision)
           << " anchor_R=" << fmt(anchor.micro_recall)
           << " anchor_F1=" << fmt(anchor.micro_f1);
  o.require(worst <= 1e-9, "metrics differ from oracle by more than 1e-9");
  o.require(std::abs(r.micro_f1 - harmonic) <= 1e-12, "micro F1 not harmonic within 1e-12");
  o.require(std::abs(anchor.micro_precision - 0.74) < 1e-15 &&
                std::abs(anchor.micro_recall - 0.60) < 1e-15,
            "anchor counts do not give P=0.74, R=0.60");
  o.require(std::abs(anchor.micro_f1 - 0.66269) <= 1e-5, "anchor F1 not 0.66269 +- 1e-5");
}

double loo_micro_f1(const CorpusStore &store, std::size_t k) {
  ExactBackend backend(store);
  PredictOptions opt;
  opt.k = k;
  std::vector<LabelSet> truths, preds;
  for (const auto &r : predict_batch_loo(backend, opt)) {
    LabelSet t;
    for (const auto &l : store.record(*store.find(*r.query_id)).labels) t.insert(l.str());
    truths.push_back(t);
    preds.emplace_back(r.predicted.begin(), r.predicted.end());
  }
  return score(truths, preds).micro_f1;
}

// 4. Classifier sanity on Gaussian clusters plus the three-neighbor example.
void classifier_sanity(Outcome &o) {
  testing::ClusterParams geometry;  // 5 clusters x 100, dim 16
  geometry.spread = 0.25f;
  const double f1 = loo_micro_f1(testing::cluster_store(geometry), 8);
  geometry.spread = 0.02f;
  const double f1_sep = loo_micro_f1(testing::cluster_store(geometry), 8);

  auto at = [](double c) {
    return std::vector<float>{static_cast<float>(c), static_cast<float>(std::sqrt(1 - c * c))};
  };
  CorpusStore hand({{"n1", {CpcCode("A01B")}, at(0.9), {}},
                    {"n2", {CpcCode("A01B"), CpcCode("G06F")}, at(0.8), {}},
                    {"n3", {CpcCode("G06F")}, at(0.7), {}}},
                   2);
  NeighborList nl;
  nl.entries = {{"n1", 0.9, 0}, {"n2", 0.8, 1}, {"n3", 0.7, 2}};
  PredictOptions opt;
  opt.k = 3;
  const auto r = vote(nl, hand, opt);
  const bool shape = r.ranking.size() == 2 && r.ranking[0].label == "A01B" &&
                     r.ranking[1].label == "G06F" &&
                     r.predicted == std::vector<std::string>{"A01B", "G06F"};
  const double sa = shape ? r.ranking[0].vote_fraction : -1;
  const double sb = shape ? r.ranking[1].vote_fraction : -1;

  o.detail << " loo_micro_f1(k=8)=" << fmt(f1) << " separated=" << fmt(f1_sep)
           << " s_A01B=" << fmt(sa) << " s_G06F=" << fmt(sb);
  o.require(f1 >= 0.95, "cluster LOO micro-F1 below 0.95");
  o.require(f1_sep == 1.0, "well-separated LOO micro-F1 not 1.0");
  o.require(shape, "hand example ranking or predicted set wrong");
  o.require(sa == (0.9 + 0.8) / (0.9 + 0.8 + 0.7) && std::abs(sa - 17.0 / 24.0) < 1e-12,
            "s_A01B != 1.7/2.4");
  o.require(sb == (0.8 + 0.7) / (0.9 + 0.8 + 0.7) && std::abs(sb - 0.625) < 1e-12,
            "s_G06F != 1.5/2.4");
}

// 5. Vote conservation, calibrated-order agreement, threshold monotonicity.
void vote_properties(Outcome &o) {
  auto store = testing::random_store(400, 8, 501, true, 10);
  std::mt19937_64 rng(502);
  std::uniform_int_distribution<int> grid(0, 1024);
  std::uniform_int_distribution<std::size_t> pick(0, store.size() - 1);
  std::size_t exact_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    NeighborList l;
    for (int i = 0; i < 1 + t % 20; ++i) {
      const auto idx = pick(rng);
      l.entries.push_back({store.record(idx).patent_id, grid(rng) / 1024.0, idx});
    }
    PredictOptions opt;
    opt.weighting = t % 4 == 0 ? Weighting::kUniform : Weighting::kSimilarity;
    const auto r = vote(l, store, opt);
    double lhs = 0, rhs = 0;
    for (const auto &s : r.ranking) lhs += s.raw;
    for (const auto &e : l.entries) {
      rhs += (r.weighting == Weighting::kUniform ? 1.0 : e.score) *
             static_cast<double>(store.record(e.record_index).labels.size());
    }
    exact_failures += lhs != rhs;
  }

  ExactBackend backend(store);
  PredictOptions opt;
  opt.k = 12;
  double worst_rel = 0;
  std::size_t order_failures = 0, shrink_failures = 0;
  for (const auto &r : predict_batch_loo(backend, opt)) {
    double lhs = 0, rhs = 0;
    for (const auto &s : r.ranking) lhs += s.raw;
    for (const auto &e : r.neighbors.entries) {
      rhs += std::clamp(e.score, 0.0, 1.0) *
             static_cast<double>(store.record(e.record_index).labels.size());
    }
    worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / std::max(1.0, rhs));
    for (std::size_t i = 1; i < r.ranking.size(); ++i) {
      order_failures += r.ranking[i - 1].calibrated < r.ranking[i].calibrated;
    }
    auto by_cal = r.ranking;
    std::stable_sort(by_cal.begin(), by_cal.end(), [](const LabelScore &a, const LabelScore &b) {
      return a.calibrated != b.calibrated ? a.calibrated > b.calibrated : a.label < b.label;
    });
    for (std::size_t i = 0; i < by_cal.size(); ++i) {
      order_failures += by_cal[i].label != r.ranking[i].label;
    }
    std::vector<std::string> prev;
    for (int step = 0; step <= 20; ++step) {
      const auto cur = select_labels(r.ranking, step / 20.0);
      if (cur.empty()) ++shrink_failures;
      if (step > 0 && cur.size() > 1) {
        shrink_failures += !(cur.size() <= prev.size() &&
                             std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
      }
      prev = cur;
    }
  }
  o.detail << " dyadic_exact_failures=" << exact_failures
           << " real_max_rel_gap=" << fmt(worst_rel) << " order_failures=" << order_failures
           << " shrink_failures=" << shrink_failures;
  o.require(exact_failures == 0, "conservation not exact on dyadic weights");
  o.require(worst_rel <= 1e-12, "conservation gap above 1e-12 on real weights");
  o.require(order_failures == 0, "calibrated ranking differs from vote ranking");
  o.require(shrink_failures == 0, "predicted set grows as threshold rises");
}

// 6. Pair counting, sampling, STS round trip.
void pair_combinatorics(Outcome &o) {
  testing::TempDir dir;
  auto texts = testing::synthetic_texts(1143, 601);
  TfidfScorer scorer(texts);
  SamplingPlan plan;
  const auto a = sample_pairs(scorer, plan);
  const auto b = sample_pairs(scorer, plan);
  std::set<std::pair<std::uint32_t, std::uint32_t>> distinct;
  bool well_formed = true;
  for (const auto &p : a.pairs) {
    distinct.insert({p.a, p.b});
    well_formed = well_formed && p.a < p.b && p.b < texts.size();
  }
  const auto labeled = label_pairs(
      a.pairs, [&](std::size_t x, std::size_t y) { return scorer.score(x, y); });
  export_sts(labeled, texts, dir.file("sts.tsv"));
  const auto rows = read_sts(dir.file("sts.tsv"));
  double worst = 0;
  for (std::size_t i = 0; i < rows.size() && i < labeled.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i].score / 5.0 - *labeled[i].silver_score));
  }
  o.detail << " count_pairs(1143)=" << count_pairs(1143) << " sampled=" << a.pairs.size()
           << " distinct=" << distinct.size() << " sts_rows=" << rows.size()
           << " sts_max_err=" << fmt(worst);
  o.require(count_pairs(1143) == 652653, "count_pairs(1143) != 652653");
  o.require(a.pairs.size() == 3432 && distinct.size() == 3432 && well_formed,
            "sample is not 3432 distinct pairs");
  o.require(a.pairs == b.pairs, "sampling not deterministic for a fixed seed");
  o.require(rows.size() == 3432, "STS file row count differs");
  o.require(worst <= 5e-5, "STS scores drift more than 5e-5");
}

// 7. Corpus and index persistence.
void persistence(Outcome &o) {
  testing::TempDir dir;
  auto store = testing::random_store(2000, 32, 701);
  save_binary(store, dir.file("c.bin"));
  const auto loaded = load_binary(dir.file("c.bin"));
  const bool corpus_exact = loaded == store && encode_binary(loaded) == encode_binary(store);

  const auto idx = AnnIndex::build(loaded, {8, 16, 702});
  idx.save(dir.file("i.bin"));
  const auto idx2 = AnnIndex::load(dir.file("i.bin"));
  const bool index_exact = idx2 == idx && idx2.encode() == read_file_bytes(dir.file("i.bin"));
  std::size_t replay_diffs = 0;
  for (const auto &q : testing::perturbed_queries(loaded, 20, 703, 0.2f)) {
    replay_diffs += !(idx.query(store, q, 10, 200) == idx2.query(loaded, q, 10, 200));
  }
  o.detail << " corpus_bit_exact=" << corpus_exact << " index_bit_exact=" << index_exact
           << " replay_diffs=" << replay_diffs;
  o.require(corpus_exact, "corpus round trip not bit-exact");
  o.require(index_exact, "index round trip not bit-exact");
  o.require(replay_diffs == 0, "loaded index answers differently");
}

// 8. k sweep 1..20 as CSV.
void k_sweep(Outcome &o) {
  const auto t0 = Clock::now();
  testing::ClusterParams geometry;
  geometry.spread = 0.3f;
  geometry.labels_per_cluster = 2;
  auto corpus = testing::cluster_store(geometry);
  auto [train, test] = split_holdout(corpus, 0.2, 801);
  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= 20; ++k) ks.push_back(k);
  const auto rows = sweep_k(train, test, ks, {});
  const auto header = metrics_csv_header();
  const auto columns = std::count(header.begin(), header.end(), ',') + 1;
  std::size_t complete = 0, clean = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = metrics_csv_row(rows[i]);
    const bool full = std::count(line.begin(), line.end(), ',') + 1 == columns &&
                      line.find(",,") == std::string::npos && line.back() != ',' &&
                      line.rfind(std::to_string(ks[i]) + ",", 0) == 0;
    complete += full;
    clean += check_report(rows[i]).empty();
  }
  const double secs = seconds_since(t0);
  o.detail << " rows=" << rows.size() << " complete=" << complete << " clean=" << clean
           << " seconds=" << fmt(secs);
  o.require(rows.size() == 20 && complete == 20, "missing or incomplete CSV rows");
  o.require(clean == 20, "invariant violations in sweep rows");
  o.require(secs < 120.0, "sweep >= 120 s");
}

}  // namespace
}  // namespace patsim

int main() {
  using patsim::Outcome;
  struct Criterion {
    const char *name;
    std::function<void(Outcome &)> fn;
  };
  const Criterion criteria[] = {
      {"AC1 exact search vs full-sort oracle", patsim::exact_search},
      {"AC2 ANN exhaustive exactness and recall", patsim::ann_recall},
      {"AC3 metrics vs naive confusion counts", patsim::metrics_oracle},
      {"AC4 classifier sanity", patsim::classifier_sanity},
      {"AC5 vote conservation and monotonicity", patsim::vote_properties},
      {"AC6 pair combinatorics and STS round trip", patsim::pair_combinatorics},
      {"AC7 corpus and index persistence", patsim::persistence},
      {"AC8 k sweep CSV", patsim::k_sweep},
  };
  int failed = 0;
  for (const auto &c : criteria) {
    Outcome o;
    try {
      c.fn(o);
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %s:%s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
