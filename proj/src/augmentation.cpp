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

#include "patsim/augmentation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "patsim/common.hpp"
#include "patsim/similarity.hpp"

namespace patsim {

std::uint64_t count_pairs(std::uint64_t n) {
  if (n < 2) return 0;
  // Halve whichever factor is even so the product cannot overflow early.
  return n % 2 == 0 ? (n / 2) * (n - 1) : n * ((n - 1) / 2);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                             : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TfidfScorer::TfidfScorer(std::span<const std::string> texts) {
  std::unordered_map<std::string, std::uint32_t> term_ids;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> tf(
      texts.size());
  std::vector<std::size_t> df;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    for (auto &tok : tokenize(texts[i])) {
      auto [it, inserted] = term_ids.try_emplace(
          std::move(tok), static_cast<std::uint32_t>(term_ids.size()));
      if (inserted) df.push_back(0);
      ++counts[it->second];
    }
    tf[i].assign(counts.begin(), counts.end());
    std::sort(tf[i].begin(), tf[i].end());
    for (const auto &[t, _] : tf[i]) ++df[t];
  }

  const double n = static_cast<double>(texts.size());
  docs_.resize(texts.size());
  norms2_.resize(texts.size());
  postings_.resize(df.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    double norm2 = 0.0;
    for (const auto &[t, count] : tf[i]) {
      const double idf =
          std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
      const double w = static_cast<double>(count) * idf;
      docs_[i].push_back({t, w});
      postings_[t].emplace_back(static_cast<std::uint32_t>(i), w);
      norm2 += w * w;
    }
    norms2_[i] = norm2;
  }
}

double TfidfScorer::score(std::size_t a, std::size_t b) const {
  const double na = norms2_.at(a), nb = norms2_.at(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  const auto &da = docs_[a];
  const auto &db = docs_[b];
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < da.size() && j < db.size()) {
    if (da[i].term < db[j].term) {
      ++i;
    } else if (db[j].term < da[i].term) {
      ++j;
    } else {
      acc += da[i].weight * db[j].weight;
      ++i;
      ++j;
    }
  }
  return std::clamp(acc / std::sqrt(na * nb), 0.0, 1.0);
}

std::vector<std::size_t> TfidfScorer::nearest(std::size_t i,
                                              std::size_t m) const {
  std::unordered_map<std::uint32_t, double> acc;
  for (const auto &e : docs_.at(i)) {
    for (const auto &[doc, w] : postings_[e.term]) {
      if (doc != i) acc[doc] += e.weight * w;
    }
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(acc.size());
  for (const auto &[doc, d] : acc) {
    if (norms2_[doc] > 0.0) ranked.emplace_back(d / std::sqrt(norms2_[doc]), doc);
  }
  const std::size_t keep = std::min(m, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end(),
                    [](const auto &x, const auto &y) {
                      if (x.first != y.first) return x.first > y.first;
                      return x.second < y.second;
                    });
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) out.push_back(ranked[k].second);
  return out;
}

double EmbeddingScorer::score(std::size_t a, std::size_t b) const {
  return std::max(0.0, cosine(store_.vector(a), store_.vector(b)));
}

std::vector<std::size_t> EmbeddingScorer::nearest(std::size_t i,
                                                  std::size_t m) const {
  if (m == 0 || store_.size() < 2) return {};
  const auto list =
      top_k_exact(store_, store_.vector(i), m, store_.record(i).patent_id);
  std::vector<std::size_t> out;
  for (const auto &e : list.entries) out.push_back(e.record_index);
  return out;
}

std::size_t score_bin(double score, std::size_t bins) {
  const double s = std::clamp(score, 0.0, 1.0);
  return std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
}

namespace {

struct Candidate {
  std::uint32_t a;
  std::uint32_t b;
  double score;
};

std::vector<Candidate> enumerate_all(std::size_t n) {
  std::vector<Candidate> out;
  out.reserve(count_pairs(n));
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) out.push_back({a, b, 0.0});
  }
  return out;
}

std::vector<Candidate> gather_capped(const PairScorer &scorer,
                                     const SamplingPlan &plan,
                                     SamplingReport &report) {
  const std::size_t n = scorer.size();
  const std::uint64_t total = count_pairs(n);
  std::unordered_set<std::uint64_t> seen;
  std::vector<Candidate> out;
  auto add = [&](std::size_t x, std::size_t y) {
    if (x == y) return;
    auto a = static_cast<std::uint32_t>(std::min(x, y));
    auto b = static_cast<std::uint32_t>(std::max(x, y));
    if (seen.insert(static_cast<std::uint64_t>(a) * n + b).second) {
      out.push_back({a, b, 0.0});
    }
  };

  std::vector<std::vector<std::size_t>> near(n);
  parallel_for(n, [&](std::size_t i) {
    near[i] = scorer.nearest(i, plan.neighbors_per_item);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : near[i]) add(i, j);
  }

  const std::uint64_t want = std::min<std::uint64_t>(
      total, out.size() + static_cast<std::uint64_t>(plan.target_count) *
                              std::max<std::size_t>(1, plan.random_factor));
  SplitMix64 rng(mix_seed(plan.seed, 0xC0FFEE));
  std::uint64_t attempts = 0;
  const std::uint64_t max_attempts = 20 * want + 1000;
  while (out.size() < want && attempts++ < max_attempts) {
    add(rng.below(n), rng.below(n));
  }
  if (out.size() < want) {
    report.warnings.push_back("random candidate generation stopped early");
  }
  return out;
}

}  // namespace

SamplingResult sample_pairs(const PairScorer &scorer, const SamplingPlan &plan) {
  const std::size_t n = scorer.size();
  if (n < 2) throw Error("pair sampling needs at least 2 items");
  if (plan.target_count == 0) throw Error("target_count must be positive");
  if (plan.bins == 0) throw Error("bins must be positive");
  if (n > 0xFFFFFFFFull) throw Error("too many items for pair sampling");

  SamplingResult result;
  auto &report = result.report;
  report.scorer = std::string(scorer.name());
  report.seed = plan.seed;
  report.total_pairs = count_pairs(n);
  report.target = plan.target_count;

  const bool take_all = plan.target_count >= report.total_pairs;
  if (plan.target_count > report.total_pairs) {
    report.warnings.push_back(
        "target " + std::to_string(plan.target_count) + " exceeds the " +
        std::to_string(report.total_pairs) + " possible pairs; returning all");
  }

  std::vector<Candidate> cands;
  if (take_all || report.total_pairs <= plan.candidate_cap) {
    cands = enumerate_all(n);
    report.exhaustive_candidates = true;
  } else {
    cands = gather_capped(scorer, plan, report);
  }
  report.candidate_count = cands.size();

  parallel_for(cands.size(), [&](std::size_t i) {
    cands[i].score = std::clamp(scorer.score(cands[i].a, cands[i].b), 0.0, 1.0);
  });

  report.candidate_histogram.assign(plan.bins, 0);
  report.sampled_histogram.assign(plan.bins, 0);
  for (const auto &c : cands) ++report.candidate_histogram[score_bin(c.score, plan.bins)];

  std::vector<Candidate> chosen;
  if (take_all) {
    chosen = std::move(cands);
  } else {
    std::sort(cands.begin(), cands.end(), [](const Candidate &x, const Candidate &y) {
      if (x.score != y.score) return x.score < y.score;
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    std::vector<std::vector<Candidate>> bins(plan.bins);
    for (const auto &c : cands) bins[score_bin(c.score, plan.bins)].push_back(c);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      SplitMix64 rng(mix_seed(plan.seed, b));
      deterministic_shuffle(bins[b], rng);
    }
    std::vector<std::size_t> cursor(plan.bins, 0);
    chosen.reserve(plan.target_count);
    bool progressed = true;
    while (chosen.size() < plan.target_count && progressed) {
      progressed = false;
      for (std::size_t b = 0; b < bins.size() && chosen.size() < plan.target_count;
           ++b) {
        if (cursor[b] < bins[b].size()) {
          chosen.push_back(bins[b][cursor[b]++]);
          progressed = true;
        }
      }
    }
    if (chosen.size() < plan.target_count) {
      throw Error("target unreachable: only " + std::to_string(chosen.size()) +
                  " distinct candidate pairs, shortfall " +
                  std::to_string(plan.target_count - chosen.size()));
    }
  }

  result.pairs.reserve(chosen.size());
  for (const auto &c : chosen) {
    ++report.sampled_histogram[score_bin(c.score, plan.bins)];
    result.pairs.push_back({c.a, c.b, std::nullopt});
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const SentencePair &x, const SentencePair &y) {
              return x.a != y.a ? x.a < y.a : x.b < y.b;
            });
  report.selected = result.pairs.size();
  return result;
}

std::vector<SentencePair> label_pairs(
    std::span<const SentencePair> pairs,
    const std::function<double(std::size_t, std::size_t)> &scorer,
    OnScorerError on_error, LabelingReport *report) {
  LabelingReport local;
  LabelingReport &rep = report ? *report : local;
  std::vector<SentencePair> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs) {
    double s = 0.0;
    try {
      s = scorer(p.a, p.b);
    } catch (const std::exception &e) {
      const std::string what = "scorer failed on pair (" + std::to_string(p.a) +
                               ", " + std::to_string(p.b) + "): " + e.what();
      if (on_error == OnScorerError::kAbort) throw Error(what);
      ++rep.skipped;
      rep.warnings.push_back(what);
      continue;
    }
    if (!(s >= 0.0 && s <= 1.0)) {
      ++rep.clamped;
      rep.warnings.push_back("score " + std::to_string(s) + " for pair (" +
                             std::to_string(p.a) + ", " + std::to_string(p.b) +
                             ") clamped to [0,1]");
      s = std::isnan(s) ? 0.0 : std::clamp(s, 0.0, 1.0);
    }
    SentencePair labeled = p;
    labeled.silver_score = s;
    out.push_back(labeled);
    ++rep.labeled;
  }
  return out;
}

std::string sanitize_sts_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_run = false;
  for (char c : text) {
    if (c == '\t' || c == '\n' || c == '\r') {
      if (!in_run) out.push_back(' ');
      in_run = true;
    } else {
      out.push_back(c);
      in_run = false;
    }
  }
  return out;
}

void export_sts(std::span<const SentencePair> pairs,
                std::span<const std::string> texts,
                const std::filesystem::path &path) {
  for (const auto &p : pairs) {
    if (!p.silver_score) {
      throw Error("pair (" + std::to_string(p.a) + ", " + std::to_string(p.b) +
                  ") has no silver score");
    }
    if (p.a >= texts.size() || p.b >= texts.size()) {
      throw Error("missing text for pair (" + std::to_string(p.a) + ", " +
                  std::to_string(p.b) + ")");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "score\tsentence1\tsentence2\n";
  char buf[32];
  for (const auto &p : pairs) {
    std::snprintf(buf, sizeof buf, "%.4f", *p.silver_score * 5.0);
    out << buf << '\t' << sanitize_sts_field(texts[p.a]) << '\t'
        << sanitize_sts_field(texts[p.b]) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<StsRow> read_sts(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<StsRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("score\t", 0) == 0) continue;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error("line " + std::to_string(line_no) + ": expected 3 columns");
    }
    StsRow row;
    try {
      row.score = std::stod(line.substr(0, t1));
    } catch (const std::exception &) {
      throw Error("line " + std::to_string(line_no) + ": bad score");
    }
    row.sentence1 = line.substr(t1 + 1, t2 - t1 - 1);
    row.sentence2 = line.substr(t2 + 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace patsim
