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

#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "patsim/ann_index.hpp"
#include "patsim/augmentation.hpp"
#include "patsim/binary_io.hpp"
#include "patsim/corpus.hpp"
#include "patsim/evaluation.hpp"
#include "patsim/knn_classifier.hpp"
#include "patsim/report_json.hpp"
#include "patsim/similarity.hpp"

namespace patsim::cli {

namespace {

using nlohmann::json;

struct AnnFlags {
  std::string index_path;
  std::size_t trees = 16;
  std::size_t leaf_size = 32;
  std::size_t search_k = 0;  // 0: default_search_k
};

struct QueryFlags {
  std::string query_id;
  std::string query_vector;
  bool include_self = false;
};

struct Config {
  // ingest
  std::string input;
  std::string output;
  bool normalize = false;
  std::optional<std::size_t> min_support;
  std::size_t dim = 0;
  // shared
  std::string corpus;
  std::string train;
  std::string test;
  double test_fraction = 0.0;
  bool loo = false;
  bool section_level = false;
  std::size_t k = 8;
  double threshold = 0.5;
  double gamma = 8.0;
  std::string weighting = "similarity";
  std::string metric = "cosine";
  std::string backend = "exact";
  std::uint64_t seed = 42;
  std::string format = "json";
  AnnFlags ann;
  QueryFlags query;
  std::string ks = "1-20";
  // sample-pairs
  std::string texts;
  std::size_t target = 3432;
  std::size_t bins = 5;
  std::string scorer;
  std::uint64_t candidate_cap = 2'000'000;
  std::string export_sts_path;
};

template <typename T>
void add_option(CLI::App *app, const std::string &name, T &var,
                const std::string &help) {
  app->add_option(name, var, help)->capture_default_str();
}

bool has_magic(const std::string &path, const char *magic) {
  std::ifstream in(path, std::ios::binary);
  char buf[4] = {};
  in.read(buf, 4);
  return in.gcount() == 4 && std::equal(buf, buf + 4, magic);
}

/// Binary corpus files are recognized by magic; anything else is read as
/// JSONL.
CorpusStore load_corpus(const std::string &path) {
  if (has_magic(path, "PSBE")) return load_binary(path);
  return ingest_jsonl(path).store;
}

std::vector<float> read_query_vector(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open query vector file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<float> v;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error &e) {
      throw Error("malformed query vector JSON: " + std::string(e.what()));
    }
    for (const auto &x : j) {
      if (!x.is_number()) throw Error("query vector entries must be numbers");
      v.push_back(x.get<float>());
    }
  } else {
    std::istringstream is(text);
    float x;
    while (is >> x) v.push_back(x);
    if (!is.eof()) throw Error("malformed query vector file: " + path);
  }
  if (v.empty()) throw Error("empty query vector");
  return v;
}

struct Query {
  std::vector<float> vector;
  std::optional<std::string> id;
  std::optional<std::string> exclude;
};

Query resolve_query(const CorpusStore &store, const QueryFlags &q) {
  Query out;
  if (!q.query_id.empty()) {
    auto idx = store.find(q.query_id);
    if (!idx) throw Error("unknown query id " + q.query_id);
    const auto v = store.vector(*idx);
    out.vector.assign(v.begin(), v.end());
    out.id = q.query_id;
    if (!q.include_self) out.exclude = q.query_id;
  } else {
    out.vector = read_query_vector(q.query_vector);
  }
  if (out.vector.size() != store.dim()) {
    throw Error("dimension mismatch: query has " +
                std::to_string(out.vector.size()) + ", corpus has " +
                std::to_string(store.dim()));
  }
  return out;
}

AnnParams ann_params(const Config &c) {
  return AnnParams{c.ann.trees, c.ann.leaf_size, c.seed};
}

AnnIndex obtain_index(const Config &c, const CorpusStore &store) {
  if (!c.ann.index_path.empty()) return AnnIndex::load(c.ann.index_path);
  return AnnIndex::build(store, ann_params(c));
}

std::optional<std::size_t> search_k_flag(const Config &c) {
  if (c.ann.search_k == 0) return std::nullopt;
  return c.ann.search_k;
}

json ann_config(const Config &c, std::size_t k) {
  return {{"index", c.ann.index_path.empty() ? json(nullptr) : json(c.ann.index_path)},
          {"n_trees", c.ann.trees},
          {"leaf_size", c.ann.leaf_size},
          {"search_k", c.ann.search_k ? c.ann.search_k
                                      : default_search_k(k, c.ann.trees)}};
}

json predict_config(const Config &c) {
  return {{"k", c.k},
          {"threshold", c.threshold},
          {"gamma", c.gamma},
          {"weighting", c.weighting},
          {"backend", c.backend}};
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void emit(std::ostream &out, const json &j) { out << j.dump(2) << '\n'; }

std::vector<std::size_t> parse_ks(const std::string &text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string tok;
  auto num = [&](const std::string &s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos != s.size() || s.empty() || v == 0) {
      throw CLI::ValidationError("--ks", "bad k value \"" + s + "\"");
    }
    return static_cast<std::size_t>(v);
  };
  while (std::getline(ss, tok, ',')) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) {
      ks.push_back(num(tok));
    } else {
      const auto lo = num(tok.substr(0, dash));
      const auto hi = num(tok.substr(dash + 1));
      if (hi < lo) throw CLI::ValidationError("--ks", "empty range " + tok);
      for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
    }
  }
  if (ks.empty()) throw CLI::ValidationError("--ks", "no k values");
  return ks;
}

// Subcommand bodies -------------------------------------------------------

int cmd_ingest(const Config &c, std::ostream &out) {
  std::optional<std::size_t> dim;
  if (c.dim > 0) dim = c.dim;
  auto ingested = ingest_jsonl(c.input, dim);
  CorpusStore store = std::move(ingested.store);
  json report;
  report["config"] = {{"subcommand", "ingest"},
                      {"input", c.input},
                      {"output", c.output},
                      {"normalize", c.normalize},
                      {"min_support", c.min_support ? json(*c.min_support)
                                                    : json(nullptr)},
                      {"dim", dim ? json(*dim) : json(nullptr)}};
  report["ingest"] = to_json(ingested.report);
  if (c.normalize) store = normalize(store);
  if (c.min_support) {
    auto [filtered, freport] = filter_by_label_support(store, *c.min_support);
    store = std::move(filtered);
    report["filter"] = to_json(freport);
  }
  save_binary(store, c.output);
  report["corpus"] = {{"records", store.size()},
                      {"dim", store.dim()},
                      {"normalized", store.normalized()},
                      {"labels", store.vocabulary().size()}};
  report["label_distribution"] = to_json(label_distribution(store), false);
  emit(out, report);
  return 0;
}

int cmd_index(const Config &c, std::ostream &out) {
  const auto store = load_corpus(c.corpus);
  const auto t0 = std::chrono::steady_clock::now();
  const auto index = AnnIndex::build(store, ann_params(c));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  index.save(c.output);
  std::size_t nodes = 0;
  for (const auto &t : index.trees()) nodes += t.size();
  emit(out, {{"config", {{"subcommand", "index"},
                         {"corpus", c.corpus},
                         {"output", c.output},
                         {"n_trees", c.ann.trees},
                         {"leaf_size", c.ann.leaf_size},
                         {"seed", c.seed}}},
             {"records", index.size()},
             {"dim", index.dim()},
             {"nodes", nodes},
             {"build_seconds", secs}});
  return 0;
}

int cmd_search(const Config &c, std::ostream &out) {
  const auto store = load_corpus(c.corpus);
  const auto q = resolve_query(store, c.query);
  const Metric metric = parse_metric(c.metric);
  const Backend backend = parse_backend(c.backend);
  if (backend == Backend::kAnn && metric != Metric::kCosine) {
    throw Error("the ANN backend supports the cosine metric only");
  }
  std::optional<AnnIndex> index;
  if (backend == Backend::kAnn) index = obtain_index(c, store);

  const auto t0 = std::chrono::steady_clock::now();
  NeighborList list;
  if (backend == Backend::kAnn) {
    const std::size_t sk = c.ann.search_k ? c.ann.search_k
                                          : default_search_k(c.k, c.ann.trees);
    list = index->query(store, q.vector, c.k,
                        std::max(sk, c.k + (q.exclude ? 1 : 0)), q.exclude);
  } else {
    list = top_k_exact(store, q.vector, c.k, q.exclude, metric);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  list.query_id = q.id;

  if (c.format == "text") {
    out << "Query: " << (q.id ? *q.id : std::string("<vector>")) << '\n';
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
      out << i + 1 << '\t' << list.entries[i].patent_id << '\t'
          << fixed2(list.entries[i].score) << '\n';
    }
    out << "Runtime of the program is " << std::setprecision(17) << secs << '\n';
    return 0;
  }
  json j = to_json(list, secs);
  json cfg = {{"subcommand", "search"},
              {"corpus", c.corpus},
              {"query_id", q.id ? json(*q.id) : json(nullptr)},
              {"query_vector", c.query.query_vector.empty()
                                   ? json(nullptr)
                                   : json(c.query.query_vector)},
              {"include_self", c.query.include_self},
              {"k", c.k},
              {"metric", c.metric},
              {"backend", c.backend},
              {"seed", c.seed}};
  if (backend == Backend::kAnn) cfg["ann"] = ann_config(c, c.k);
  j["config"] = std::move(cfg);
  emit(out, j);
  return 0;
}

PredictOptions predict_options(const Config &c) {
  PredictOptions o;
  o.k = c.k;
  o.threshold = c.threshold;
  o.gamma = c.gamma;
  o.weighting = parse_weighting(c.weighting);
  return o;
}

int cmd_classify(const Config &c, std::ostream &out, std::ostream &err) {
  const auto store = load_corpus(c.corpus);
  const auto q = resolve_query(store, c.query);
  const auto opts = predict_options(c);
  PredictionResult result;
  if (parse_backend(c.backend) == Backend::kAnn) {
    const auto index = obtain_index(c, store);
    AnnBackend backend(index, store, search_k_flag(c));
    result = predict(backend, q.vector, opts, q.exclude);
  } else {
    ExactBackend backend(store);
    result = predict(backend, q.vector, opts, q.exclude);
  }
  result.query_id = q.id;
  for (const auto &w : result.warnings) err << "warning: " << w << '\n';

  if (c.format == "text") {
    out << "Predicted:";
    for (const auto &l : result.predicted) out << ' ' << l;
    out << '\n';
    for (const auto &s : result.ranking) {
      out << s.label << '\t' << fixed2(s.vote_fraction) << '\t'
          << fixed2(s.calibrated) << '\n';
    }
    return 0;
  }
  json j = to_json(result, store);
  json cfg = predict_config(c);
  cfg["subcommand"] = "classify";
  cfg["corpus"] = c.corpus;
  cfg["query_id"] = q.id ? json(*q.id) : json(nullptr);
  cfg["include_self"] = c.query.include_self;
  cfg["seed"] = c.seed;
  if (c.backend == "ann") cfg["ann"] = ann_config(c, c.k);
  j["config"] = std::move(cfg);
  emit(out, j);
  return 0;
}

EvalOptions eval_options(const Config &c) {
  EvalOptions o;
  o.predict = predict_options(c);
  o.backend = parse_backend(c.backend);
  o.ann = ann_params(c);
  o.search_k = search_k_flag(c);
  return o;
}

struct Splits {
  std::optional<CorpusStore> train;
  std::optional<CorpusStore> test;
  std::optional<CorpusStore> whole;  // leave-one-out
};

Splits load_splits(const Config &c) {
  Splits s;
  if (!c.train.empty() || !c.test.empty()) {
    if (c.train.empty() || c.test.empty()) {
      throw Error("--train and --test must be given together");
    }
    s.train = load_corpus(c.train);
    s.test = load_corpus(c.test);
    return s;
  }
  if (c.corpus.empty()) {
    throw Error("give --train/--test, or --corpus with --test-fraction or --loo");
  }
  auto corpus = load_corpus(c.corpus);
  if (c.loo) {
    s.whole = std::move(corpus);
    return s;
  }
  if (c.test_fraction <= 0.0) {
    throw Error("--corpus needs --test-fraction or --loo");
  }
  auto [train, test] = split_holdout(corpus, c.test_fraction, c.seed);
  s.train = std::move(train);
  s.test = std::move(test);
  return s;
}

json eval_config(const Config &c, const std::string &sub) {
  json cfg = predict_config(c);
  cfg["subcommand"] = sub;
  cfg["train"] = c.train.empty() ? json(nullptr) : json(c.train);
  cfg["test"] = c.test.empty() ? json(nullptr) : json(c.test);
  cfg["corpus"] = c.corpus.empty() ? json(nullptr) : json(c.corpus);
  cfg["test_fraction"] = c.test_fraction > 0.0 ? json(c.test_fraction) : json(nullptr);
  cfg["loo"] = c.loo;
  cfg["seed"] = c.seed;
  if (c.backend == "ann") cfg["ann"] = ann_config(c, c.k);
  return cfg;
}

int cmd_evaluate(const Config &c, std::ostream &out) {
  auto splits = load_splits(c);
  const auto opts = eval_options(c);
  EvalRun run = splits.whole ? evaluate_loo_run(*splits.whole, opts)
                             : evaluate_split_run(*splits.train, *splits.test, opts);
  const auto violations = check_report(run.report);

  if (c.format == "csv") {
    out << metrics_csv_header() << '\n' << metrics_csv_row(run.report) << '\n';
    return violations.empty() ? 0 : 1;
  }
  json j;
  j["config"] = eval_config(c, "evaluate");
  j["metrics"] = to_json(run.report);
  if (c.section_level) {
    j["section_level"] = to_json(section_level_metrics(run.truths, run.predictions));
  }
  j["invariant_violations"] = violations;
  emit(out, j);
  return violations.empty() ? 0 : 1;
}

int cmd_sweep(const Config &c, std::ostream &out) {
  const auto ks = parse_ks(c.ks);
  auto splits = load_splits(c);
  if (splits.whole) throw Error("sweep-k does not support --loo");
  const auto rows = sweep_k(*splits.train, *splits.test, ks, eval_options(c));
  std::size_t bad = 0;
  json violations = json::object();
  for (const auto &r : rows) {
    const auto v = check_report(r);
    if (!v.empty()) {
      ++bad;
      violations[std::to_string(*r.k)] = v;
    }
  }
  if (c.format == "csv") {
    out << metrics_csv_header() << '\n';
    for (const auto &r : rows) out << metrics_csv_row(r) << '\n';
    return bad == 0 ? 0 : 1;
  }
  json j;
  json cfg = eval_config(c, "sweep-k");
  cfg["ks"] = ks;
  cfg.erase("k");
  j["config"] = std::move(cfg);
  json arr = json::array();
  for (const auto &r : rows) arr.push_back(to_json(r));
  j["rows"] = std::move(arr);
  j["invariant_violations"] = violations;
  emit(out, j);
  return bad == 0 ? 0 : 1;
}

std::vector<std::string> read_text_lines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open texts file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

int cmd_sample_pairs(const Config &c, std::ostream &out, std::ostream &err) {
  std::optional<CorpusStore> store;
  std::vector<std::string> texts;
  if (!c.corpus.empty()) {
    store = load_corpus(c.corpus);
    bool all_text = true;
    for (const auto &r : store->records()) all_text = all_text && r.claim_text;
    if (all_text) {
      for (const auto &r : store->records()) texts.push_back(*r.claim_text);
    }
  }
  if (!c.texts.empty()) {
    texts = read_text_lines(c.texts);
    if (store && texts.size() != store->size()) {
      throw Error("--texts has " + std::to_string(texts.size()) +
                  " lines but the corpus has " + std::to_string(store->size()) +
                  " records");
    }
  }
  if (!store && texts.empty()) throw Error("give --corpus or --texts");

  std::string scorer_name = c.scorer;
  if (scorer_name.empty()) scorer_name = texts.empty() ? "embedding" : "lexical";
  std::unique_ptr<TfidfScorer> lexical;
  if (!texts.empty()) lexical = std::make_unique<TfidfScorer>(texts);
  std::unique_ptr<PairScorer> embedding;
  const PairScorer *sampler = nullptr;
  if (scorer_name == "lexical") {
    if (!lexical) throw Error("lexical scorer needs claim texts");
    sampler = lexical.get();
  } else if (scorer_name == "embedding") {
    if (!store) throw Error("embedding scorer needs --corpus");
    embedding = std::make_unique<EmbeddingScorer>(*store);
    sampler = embedding.get();
  } else {
    throw Error("unknown scorer \"" + scorer_name + "\"");
  }

  SamplingPlan plan;
  plan.target_count = c.target;
  plan.bins = c.bins;
  plan.seed = c.seed;
  plan.candidate_cap = c.candidate_cap;
  const auto sampled = sample_pairs(*sampler, plan);
  for (const auto &w : sampled.report.warnings) err << "warning: " << w << '\n';

  // Silver labels come from the lexical scorer when texts exist; otherwise
  // from the sampling scorer.
  const PairScorer &labeler = lexical ? *lexical : *sampler;
  LabelingReport lrep;
  const auto labeled = label_pairs(
      sampled.pairs,
      [&](std::size_t a, std::size_t b) { return labeler.score(a, b); },
      OnScorerError::kAbort, &lrep);
  for (const auto &w : lrep.warnings) err << "warning: " << w << '\n';

  json j;
  j["config"] = {{"subcommand", "sample-pairs"},
                 {"corpus", c.corpus.empty() ? json(nullptr) : json(c.corpus)},
                 {"texts", c.texts.empty() ? json(nullptr) : json(c.texts)},
                 {"target", c.target},
                 {"bins", c.bins},
                 {"seed", c.seed},
                 {"scorer", scorer_name},
                 {"candidate_cap", c.candidate_cap},
                 {"export_sts", c.export_sts_path.empty()
                                    ? json(nullptr)
                                    : json(c.export_sts_path)}};
  j["sampling"] = to_json(sampled.report);
  j["labeling"] = {{"scorer", std::string(labeler.name())},
                   {"labeled", lrep.labeled},
                   {"clamped", lrep.clamped},
                   {"skipped", lrep.skipped}};
  if (!c.export_sts_path.empty()) {
    if (texts.empty()) throw Error("--export-sts needs claim texts");
    export_sts(labeled, texts, c.export_sts_path);
    j["exported_rows"] = labeled.size();
  }
  emit(out, j);
  return 0;
}

// Parser wiring -----------------------------------------------------------

void add_query_flags(CLI::App *sub, Config &c) {
  auto *group = sub->add_option_group("query");
  group->add_option("--query-id", c.query.query_id, "Stored patent to query with");
  group->add_option("--query-vector", c.query.query_vector,
                    "File with a JSON array or whitespace-separated floats");
  group->require_option(1);
  sub->add_flag("--include-self", c.query.include_self,
                "Do not exclude the query patent from its own results");
}

void add_ann_flags(CLI::App *sub, Config &c) {
  sub->add_option("--backend", c.backend, "exact or ann")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "ann"}));
  sub->add_option("--index", c.ann.index_path, "Prebuilt ANN index file");
  sub->add_option("--trees", c.ann.trees, "ANN trees")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--leaf-size", c.ann.leaf_size, "ANN leaf size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--search-k", c.ann.search_k,
                  "Candidates to gather (default 32 * k * trees)");
  add_option(sub, "--seed", c.seed, "Seed for index build and splits");
}

void add_predict_flags(CLI::App *sub, Config &c) {
  sub->add_option("--k", c.k, "Neighbors per query")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--threshold", c.threshold, "Vote-fraction threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--gamma", c.gamma, "Sigmoid slope")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--weighting", c.weighting, "similarity or uniform")
      ->capture_default_str()
      ->check(CLI::IsMember({"similarity", "uniform"}));
}

void add_split_flags(CLI::App *sub, Config &c) {
  sub->add_option("--train", c.train, "Train corpus");
  sub->add_option("--test", c.test, "Test corpus");
  sub->add_option("--corpus", c.corpus, "Single corpus to split");
  sub->add_option("--test-fraction", c.test_fraction,
                  "Holdout fraction when splitting --corpus (e.g. 0.08)");
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  Config c;
  CLI::App app{"Patent similarity search and CPC classification engine",
               "patsim"};
  app.require_subcommand(1);

  auto *ingest = app.add_subcommand("ingest", "JSONL records to a binary corpus");
  ingest->add_option("--input", c.input, "JSONL file")->required();
  ingest->add_option("--output", c.output, "Corpus file to write")->required();
  ingest->add_flag("--normalize", c.normalize, "Scale vectors to unit norm");
  ingest->add_option("--min-support", c.min_support,
                     "Drop labels with fewer records (bare flag: 350)")
      ->expected(0, 1)
      ->default_str(std::to_string(kDefaultMinSupport));
  ingest->add_option("--dim", c.dim, "Expected vector dimension");

  auto *index = app.add_subcommand("index", "Build an ANN index for a corpus");
  index->add_option("--corpus", c.corpus, "Normalized corpus")->required();
  index->add_option("--output", c.output, "Index file to write")->required();
  index->add_option("--trees", c.ann.trees, "Trees")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  index->add_option("--leaf-size", c.ann.leaf_size, "Leaf size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_option(index, "--seed", c.seed, "Build seed");

  auto *search = app.add_subcommand("search", "Nearest patents for a query");
  search->add_option("--corpus", c.corpus, "Corpus file")->required();
  add_query_flags(search, c);
  search->add_option("--k", c.k, "Results to return")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  search->add_option("--metric", c.metric, "cosine or euclidean")
      ->capture_default_str()
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  add_ann_flags(search, c);
  search->add_option("--format", c.format, "json or text")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "text"}));

  auto *classify = app.add_subcommand("classify", "Predict CPC subclasses");
  classify->add_option("--corpus", c.corpus, "Labeled corpus")->required();
  add_query_flags(classify, c);
  add_predict_flags(classify, c);
  add_ann_flags(classify, c);
  classify->add_option("--format", c.format, "json or text")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "text"}));

  auto *evaluate = app.add_subcommand("evaluate", "Score a classification run");
  add_split_flags(evaluate, c);
  evaluate->add_flag("--loo", c.loo, "Leave-one-out over --corpus");
  evaluate->add_flag("--section-level", c.section_level,
                     "Also report metrics at CPC section level");
  add_predict_flags(evaluate, c);
  add_ann_flags(evaluate, c);
  evaluate->add_option("--format", c.format, "json or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  auto *sweep = app.add_subcommand("sweep-k", "Metrics for a range of k");
  add_split_flags(sweep, c);
  sweep->add_option("--ks", c.ks, "Comma list and ranges, e.g. 1,8,20 or 1-20")
      ->capture_default_str();
  sweep->add_option("--threshold", c.threshold, "Vote-fraction threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--gamma", c.gamma, "Sigmoid slope")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--weighting", c.weighting, "similarity or uniform")
      ->capture_default_str()
      ->check(CLI::IsMember({"similarity", "uniform"}));
  add_ann_flags(sweep, c);
  sweep->add_option("--format", c.format, "json or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  auto *sample = app.add_subcommand("sample-pairs",
                                    "Balanced pair sampling and STS export");
  sample->add_option("--corpus", c.corpus, "Corpus (JSONL with claim_text, or binary)");
  sample->add_option("--texts", c.texts, "One claim text per line");
  sample->add_option("--target", c.target, "Pairs to select")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sample->add_option("--bins", c.bins, "Score bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_option(sample, "--seed", c.seed, "Sampling seed");
  sample->add_option("--scorer", c.scorer,
                     "lexical or embedding (default: lexical when texts exist)")
      ->check(CLI::IsMember({"lexical", "embedding"}));
  add_option(sample, "--candidate-cap", c.candidate_cap,
             "Largest pair count that is fully enumerated");
  sample->add_option("--export-sts", c.export_sts_path, "STS TSV to write");

  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const auto &a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(c, out);
    if (*index) return cmd_index(c, out);
    if (*search) return cmd_search(c, out);
    if (*classify) return cmd_classify(c, out, err);
    if (*evaluate) return cmd_evaluate(c, out);
    if (*sweep) return cmd_sweep(c, out);
    if (*sample) return cmd_sample_pairs(c, out, err);
  } catch (const CLI::ValidationError &e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace patsim::cli
