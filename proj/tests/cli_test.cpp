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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patsim/augmentation.hpp"
#include "patsim/corpus.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace patsim {
namespace {

using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "patsim");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string jsonl_line(const PatentRecord &r) {
  json j;
  j["patent_id"] = r.patent_id;
  json labels = json::array();
  for (const auto &l : r.labels) labels.push_back(l.str());
  j["labels"] = labels;
  j["vector"] = r.vector;
  if (r.claim_text) j["claim_text"] = *r.claim_text;
  return j.dump();
}

std::string write_jsonl(const testing::TempDir &dir, const std::string &name,
                        const CorpusStore &s,
                        const std::vector<std::string> *texts = nullptr) {
  std::string body;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto r = s.record(i);
    if (texts) r.claim_text = (*texts)[i];
    body += jsonl_line(r) + "\n";
  }
  return dir.write(name, body).string();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = write_jsonl(dir_, "c.jsonl", testing::cluster_store({}));
    auto r = run({"ingest", "--input", corpus_, "--output", bin(), "--normalize"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::string bin() const { return dir_.file("c.bin").string(); }

  testing::TempDir dir_;
  std::string corpus_;
};

TEST_F(CliTest, IngestReportsCounts) {
  auto s = testing::random_store(100, 8, 1);
  auto body = testing::slurp(write_jsonl(dir_, "d.jsonl", s));
  body += jsonl_line(s.record(3)) + "\n" + jsonl_line(s.record(4)) + "\n";
  auto path = dir_.write("dups.jsonl", body).string();
  auto r = run({"ingest", "--input", path, "--output", dir_.file("d.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.j();
  EXPECT_EQ(j["ingest"]["records"], 100);
  EXPECT_EQ(j["ingest"]["duplicates_dropped"], 2);
  EXPECT_EQ(j["config"]["subcommand"], "ingest");
  EXPECT_EQ(load_binary(dir_.file("d.bin")), s);
}

TEST_F(CliTest, IngestMinSupport) {
  auto r = run({"ingest", "--input", corpus_, "--output", dir_.file("f.bin").string(),
                "--min-support", "101"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("filter removed entire corpus"), std::string::npos);
  auto ok = run({"ingest", "--input", corpus_, "--output", dir_.file("f.bin").string(),
                 "--min-support", "100"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.j()["filter"]["remaining_classes"], 5);
}

TEST_F(CliTest, IngestBadLineNamesLine) {
  auto path = dir_.write("bad.jsonl",
                         R"({"patent_id":"1","labels":["A01B"],"vector":[1,0]})"
                         "\n{oops\n");
  auto r = run({"ingest", "--input", path.string(), "--output",
                dir_.file("x.bin").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, SearchExcludesSelf) {
  auto r = run({"search", "--corpus", bin(), "--query-id", testing::make_id(7),
                "--k", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.j();
  ASSERT_EQ(j["results"].size(), 20u);
  for (const auto &e : j["results"]) EXPECT_NE(e["patent_id"], testing::make_id(7));
  EXPECT_EQ(j["config"]["k"], 20);
  EXPECT_TRUE(j.contains("runtime_seconds"));

  auto self = run({"search", "--corpus", bin(), "--query-id", testing::make_id(7),
                   "--include-self", "--k", "1"});
  EXPECT_EQ(self.j()["results"][0]["patent_id"], testing::make_id(7));
}

TEST_F(CliTest, SearchTextFormat) {
  auto r = run({"search", "--corpus", bin(), "--query-id", testing::make_id(0),
                "--k", "3", "--format", "text"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Runtime of the program is "), std::string::npos);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(CliTest, SearchAnnMatchesExactWhenExhaustive) {
  auto exact = run({"search", "--corpus", bin(), "--query-id", testing::make_id(42)});
  auto ann = run({"search", "--corpus", bin(), "--query-id", testing::make_id(42),
                  "--backend", "ann", "--trees", "4", "--search-k", "500"});
  ASSERT_EQ(ann.code, 0) << ann.err;
  EXPECT_EQ(exact.j()["results"], ann.j()["results"]);
  EXPECT_EQ(ann.j()["config"]["ann"]["n_trees"], 4);

  auto idx = dir_.file("i.idx").string();
  ASSERT_EQ(run({"index", "--corpus", bin(), "--output", idx, "--trees", "4"}).code, 0);
  auto loaded = run({"search", "--corpus", bin(), "--query-id", testing::make_id(42),
                     "--backend", "ann", "--index", idx, "--search-k", "500"});
  EXPECT_EQ(loaded.j()["results"], ann.j()["results"]);
}

TEST_F(CliTest, SearchByVectorFile) {
  auto v = dir_.write("q.json", "[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]");
  auto r = run({"search", "--corpus", bin(), "--query-vector", v.string(), "--k", "2",
                "--metric", "euclidean"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["metric"], "euclidean");
  EXPECT_TRUE(r.j()["query_id"].is_null());
}

TEST_F(CliTest, SearchErrors) {
  EXPECT_EQ(run({"search", "--corpus", bin(), "--query-id", "nope"}).code, 1);
  EXPECT_EQ(run({"search", "--corpus", bin()}).code, 2);
  EXPECT_EQ(run({"search", "--corpus", bin(), "--query-id", testing::make_id(1),
                 "--k", "0"})
                .code,
            2);
  EXPECT_EQ(run({"search", "--corpus", dir_.file("missing.bin").string(),
                 "--query-id", "x"})
                .code,
            1);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ClassifyUnanimous) {
  auto r = run({"classify", "--corpus", bin(), "--query-id", testing::make_id(150)});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.j();
  EXPECT_EQ(j["predicted"], json::array({testing::make_label(1)}));
  EXPECT_EQ(j["neighbors"].size(), 8u);
  EXPECT_EQ(j["config"]["k"], 8);
}

TEST_F(CliTest, ClassifyHandExample) {
  PatentRecord a, b, c;
  auto at = [](double x) {
    return std::vector<float>{static_cast<float>(x), static_cast<float>(std::sqrt(1 - x * x))};
  };
  a = {"n1", {CpcCode("A01B")}, at(0.9), {}};
  b = {"n2", {CpcCode("A01B"), CpcCode("G06F")}, at(0.8), {}};
  c = {"n3", {CpcCode("G06F")}, at(0.7), {}};
  auto path = write_jsonl(dir_, "hand.jsonl", CorpusStore({a, b, c}, 2));
  auto q = dir_.write("q.txt", "1 0");
  auto r = run({"classify", "--corpus", path, "--query-vector", q.string(), "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.j();
  EXPECT_EQ(j["predicted"], json::array({"A01B", "G06F"}));
  EXPECT_NEAR(j["ranking"][0]["vote_fraction"].get<double>(), 0.70833, 1e-5);
  EXPECT_EQ(j["ranking"][0]["label"], "A01B");

  auto many = run({"classify", "--corpus", path, "--query-vector", q.string(), "--k", "9"});
  EXPECT_EQ(many.code, 0);
  EXPECT_NE(many.err.find("warning"), std::string::npos);
  EXPECT_EQ(run({"classify", "--corpus", path, "--query-vector", q.string(), "--k", "0"}).code,
            2);
}

TEST_F(CliTest, EvaluateSelfLookup) {
  auto r = run({"evaluate", "--train", bin(), "--test", bin(), "--section-level"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.j();
  EXPECT_EQ(j["metrics"]["micro"]["f1"], 1.0);
  EXPECT_TRUE(j["invariant_violations"].empty());
  EXPECT_TRUE(j.contains("section_level"));
}

TEST_F(CliTest, EvaluateHoldoutAndLoo) {
  auto h = run({"evaluate", "--corpus", bin(), "--test-fraction", "0.2"});
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_EQ(h.j()["metrics"]["instances"], 100);
  auto l = run({"evaluate", "--corpus", bin(), "--loo", "--format", "csv"});
  ASSERT_EQ(l.code, 0) << l.err;
  EXPECT_EQ(std::count(l.out.begin(), l.out.end(), '\n'), 2);
}

TEST_F(CliTest, SweepEmitsRowPerK) {
  auto r = run({"sweep-k", "--corpus", bin(), "--test-fraction", "0.2", "--ks", "1,8,20",
                "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1].rfind("1,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("20,", 0), 0u);

  auto j = run({"sweep-k", "--corpus", bin(), "--test-fraction", "0.2", "--ks", "2-5"}).j();
  EXPECT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["config"]["ks"], json::array({2, 3, 4, 5}));
  EXPECT_EQ(run({"sweep-k", "--corpus", bin(), "--test-fraction", "0.2", "--ks", "5-2"}).code,
            2);
}

TEST_F(CliTest, SamplePairsExportsSts) {
  auto texts = testing::synthetic_texts(60, 3);
  auto path = write_jsonl(dir_, "t.jsonl", testing::random_store(60, 4, 2), &texts);
  auto sts = dir_.file("o.tsv").string();
  auto r = run({"sample-pairs", "--corpus", path, "--target", "100", "--export-sts", sts});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.j();
  EXPECT_EQ(j["sampling"]["selected"], 100);
  EXPECT_EQ(j["exported_rows"], 100);
  EXPECT_EQ(j["config"]["scorer"], "lexical");
  EXPECT_EQ(read_sts(sts).size(), 100u);
  auto again = run({"sample-pairs", "--corpus", path, "--target", "100"});
  EXPECT_EQ(again.j()["sampling"], j["sampling"]);

  std::string lines;
  for (const auto &t : texts) lines += t + "\n";
  auto tpath = dir_.write("t.txt", lines).string();
  auto all = run({"sample-pairs", "--texts", tpath, "--target", "5000"});
  ASSERT_EQ(all.code, 0) << all.err;
  EXPECT_EQ(all.j()["sampling"]["selected"], 1770);
  EXPECT_NE(all.err.find("warning"), std::string::npos);

  auto emb = run({"sample-pairs", "--corpus", bin(), "--target", "50"});
  ASSERT_EQ(emb.code, 0) << emb.err;
  EXPECT_EQ(emb.j()["config"]["scorer"], "embedding");
}

}  // namespace
}  // namespace patsim
