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

#include "patsim/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "patsim/binary_io.hpp"
#include "patsim/common.hpp"

namespace patsim {

namespace {

constexpr char kCorpusMagic[4] = {'P', 'S', 'B', 'E'};

double l2_norm(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * x;
  return std::sqrt(acc);
}

void canonicalize_labels(std::vector<CpcCode> &labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

}  // namespace

CorpusStore::CorpusStore(std::vector<PatentRecord> records, std::size_t dim)
    : records_(std::move(records)), dim_(dim) {
  if (dim_ == 0) throw Error("corpus dimension must be positive");
  std::vector<CpcCode> all_labels;
  by_id_.reserve(records_.size());
  norms_.reserve(records_.size());
  normalized_ = true;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto &r = records_[i];
    if (r.patent_id.empty()) {
      throw Error("record " + std::to_string(i) + ": empty patent_id");
    }
    if (!by_id_.emplace(r.patent_id, i).second) {
      throw Error("duplicate patent_id " + r.patent_id);
    }
    if (r.vector.size() != dim_) {
      throw Error("dimension mismatch for " + r.patent_id + ": expected " +
                  std::to_string(dim_) + ", got " +
                  std::to_string(r.vector.size()));
    }
    canonicalize_labels(r.labels);
    if (r.labels.empty()) throw Error("empty label set for " + r.patent_id);
    all_labels.insert(all_labels.end(), r.labels.begin(), r.labels.end());
    const double n = l2_norm(r.vector);
    norms_.push_back(n);
    if (std::abs(n - 1.0) > kUnitNormTolerance) normalized_ = false;
  }
  if (records_.empty()) normalized_ = false;
  vocabulary_ = LabelVocabulary(std::move(all_labels));
  label_indices_.reserve(records_.size());
  for (const auto &r : records_) {
    std::vector<std::uint32_t> idx;
    idx.reserve(r.labels.size());
    for (const auto &c : r.labels) {
      idx.push_back(static_cast<std::uint32_t>(*vocabulary_.index_of(c)));
    }
    label_indices_.push_back(std::move(idx));
  }
}

std::optional<std::size_t> CorpusStore::find(
    const std::string &patent_id) const {
  auto it = by_id_.find(patent_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

IngestResult ingest_jsonl(const std::filesystem::path &path,
                          std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());

  IngestReport report;
  std::vector<PatentRecord> records;
  std::unordered_set<std::string> seen;
  std::optional<std::size_t> dim = expected_dim;
  if (dim && *dim == 0) throw Error("expected dimension must be positive");

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report.lines_read;
    const std::string where = "line " + std::to_string(line_no) + ": ";

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(where + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw Error(where + "record must be a JSON object");

    PatentRecord rec;
    auto id = obj.find("patent_id");
    if (id == obj.end() || !id->is_string() ||
        id->get<std::string>().empty()) {
      throw Error(where + "missing or empty \"patent_id\"");
    }
    rec.patent_id = id->get<std::string>();

    auto labels = obj.find("labels");
    if (labels == obj.end() || !labels->is_array()) {
      throw Error(where + "missing \"labels\" array");
    }
    for (const auto &l : *labels) {
      if (!l.is_string()) throw Error(where + "labels must be strings");
      try {
        rec.labels.emplace_back(l.get<std::string>());
      } catch (const Error &e) {
        throw Error(where + e.what());
      }
    }
    if (rec.labels.empty()) throw Error(where + "empty label set");

    auto vec = obj.find("vector");
    if (vec == obj.end() || !vec->is_array()) {
      throw Error(where + "missing \"vector\" array");
    }
    rec.vector.reserve(vec->size());
    for (const auto &x : *vec) {
      if (!x.is_number()) throw Error(where + "vector entries must be numbers");
      rec.vector.push_back(x.get<float>());
    }
    if (!dim) {
      if (rec.vector.empty()) throw Error(where + "empty vector");
      dim = rec.vector.size();
    }
    if (rec.vector.size() != *dim) {
      throw Error(where + "dimension mismatch: expected " +
                  std::to_string(*dim) + ", got " +
                  std::to_string(rec.vector.size()));
    }

    auto text = obj.find("claim_text");
    if (text != obj.end() && !text->is_null()) {
      if (!text->is_string()) throw Error(where + "claim_text must be a string");
      rec.claim_text = text->get<std::string>();
    }

    if (!seen.insert(rec.patent_id).second) {
      ++report.duplicates_dropped;
      report.duplicate_ids.push_back(rec.patent_id);
      continue;
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw Error("empty corpus");
  report.records = records.size();
  return {CorpusStore(std::move(records), *dim), std::move(report)};
}

CorpusStore normalize(const CorpusStore &store) {
  std::vector<PatentRecord> out(store.records().begin(),
                                store.records().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double n = store.norm(i);
    if (n == 0.0) {
      throw Error("cannot normalize zero vector of " + out[i].patent_id);
    }
    for (float &x : out[i].vector) {
      x = static_cast<float>(static_cast<double>(x) / n);
    }
  }
  return CorpusStore(std::move(out), store.dim());
}

std::pair<CorpusStore, FilterReport> filter_by_label_support(
    const CorpusStore &store, std::size_t min_support) {
  if (store.empty()) throw Error("empty corpus");
  FilterReport report;
  report.min_support = min_support;

  const auto &vocab = store.vocabulary();
  std::vector<std::size_t> support(vocab.size(), 0);
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (auto li : store.label_indices(i)) ++support[li];
  }
  std::vector<bool> keep(vocab.size());
  for (std::size_t l = 0; l < vocab.size(); ++l) {
    keep[l] = support[l] >= min_support;
    if (!keep[l]) report.removed_labels.push_back(vocab.code(l).str());
  }

  std::vector<PatentRecord> out;
  out.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    PatentRecord r = store.record(i);
    r.labels.clear();
    for (auto li : store.label_indices(i)) {
      if (keep[li]) r.labels.push_back(vocab.code(li));
    }
    if (r.labels.empty()) {
      ++report.dropped_records;
      continue;
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error("filter removed entire corpus");
  CorpusStore filtered(std::move(out), store.dim());
  report.remaining_classes = filtered.vocabulary().size();
  return {std::move(filtered), std::move(report)};
}

std::vector<std::uint8_t> encode_binary(const CorpusStore &store) {
  const auto &vocab = store.vocabulary();
  if (vocab.size() > std::numeric_limits<std::uint16_t>::max() + 1u) {
    throw Error("vocabulary too large for 16-bit label indices");
  }
  if (store.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("dimension too large");
  }
  ByteWriter w;
  w.put_bytes(kCorpusMagic, sizeof kCorpusMagic);
  w.put_u32(kCorpusFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(store.dim()));
  w.put_u64(store.size());
  w.put_u32(static_cast<std::uint32_t>(vocab.size()));
  for (const auto &c : vocab.codes()) w.put_string16(c.str());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto &r = store.record(i);
    w.put_string16(r.patent_id);
    auto labels = store.label_indices(i);
    w.put_u16(static_cast<std::uint16_t>(labels.size()));
    for (auto li : labels) w.put_u16(static_cast<std::uint16_t>(li));
    for (float x : r.vector) w.put_f32(x);
  }
  w.seal();
  return w.bytes();
}

CorpusStore decode_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kCorpusMagic ||
      !std::equal(std::begin(kCorpusMagic), std::end(kCorpusMagic),
                  bytes.begin())) {
    throw Error("not a corpus file");
  }
  ByteReader r(bytes);
  r.skip(sizeof kCorpusMagic);
  const std::uint32_t version = r.get_u32();
  if (version != kCorpusFormatVersion) {
    throw Error("unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = r.get_u32();
  const std::uint64_t count = r.get_u64();
  const std::uint32_t vocab_size = r.get_u32();
  std::vector<std::string> code_strings;
  code_strings.reserve(std::min<std::size_t>(vocab_size, r.remaining() / 2));
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    code_strings.push_back(r.get_string16());
  }
  // Every record needs at least 2+1 id bytes, 2+2 label bytes and 4*dim
  // vector bytes; reject impossible counts before allocating.
  if (count > r.remaining() / (7 + 4ull * dim)) throw Error("truncated file");
  std::vector<PatentRecord> records(count);
  std::vector<std::vector<std::uint16_t>> raw_labels(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    records[i].patent_id = r.get_string16();
    raw_labels[i].resize(r.get_u16());
    for (auto &li : raw_labels[i]) li = r.get_u16();
    records[i].vector.resize(dim);
    for (auto &x : records[i].vector) x = r.get_f32();
  }
  // Structure is intact; check integrity before interpreting contents.
  verify_trailer(bytes, r);

  std::vector<CpcCode> codes;
  codes.reserve(code_strings.size());
  for (const auto &c : code_strings) codes.emplace_back(c);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (auto li : raw_labels[i]) {
      if (li >= codes.size()) throw Error("corrupt file: label index");
      records[i].labels.push_back(codes[li]);
    }
  }
  CorpusStore store(std::move(records), dim);
  if (store.vocabulary().size() != codes.size()) {
    throw Error("corrupt file: vocabulary has unused codes");
  }
  return store;
}

void save_binary(const CorpusStore &store, const std::filesystem::path &path) {
  write_file_bytes(path, encode_binary(store));
}

CorpusStore load_binary(const std::filesystem::path &path) {
  const auto bytes = read_file_bytes(path);
  return decode_binary(bytes);
}

std::size_t LabelDistribution::below(std::size_t support) const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(),
                    [&](const auto &kv) { return kv.second < support; }));
}

LabelDistribution label_distribution(const CorpusStore &store) {
  LabelDistribution d;
  d.records = store.size();
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (const auto &c : store.record(i).labels) {
      ++d.counts[c.str()];
      ++d.total_assignments;
    }
  }
  if (d.counts.empty()) return d;
  std::vector<std::size_t> values;
  values.reserve(d.counts.size());
  for (const auto &[_, n] : d.counts) values.push_back(n);
  std::sort(values.begin(), values.end());
  d.min_count = values.front();
  d.max_count = values.back();
  d.mean_count = static_cast<double>(d.total_assignments) /
                 static_cast<double>(values.size());
  const std::size_t m = values.size() / 2;
  d.median_count = values.size() % 2 == 1
                       ? static_cast<double>(values[m])
                       : 0.5 * static_cast<double>(values[m - 1] + values[m]);
  d.mean_labels_per_record = static_cast<double>(d.total_assignments) /
                             static_cast<double>(d.records);
  return d;
}

}  // namespace patsim
