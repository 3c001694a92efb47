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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patsim/cpc.hpp"

namespace patsim {

struct PatentRecord {
  std::string patent_id;
  std::vector<CpcCode> labels;  // sorted, unique, non-empty
  std::vector<float> vector;
  std::optional<std::string> claim_text;

  friend bool operator==(const PatentRecord &, const PatentRecord &) = default;
};

/// Immutable collection of patent records sharing one embedding dimension.
///
/// The constructor is the single validation point: ids must be unique, every
/// vector must have length `dim`, and every record needs at least one label.
/// Label lists are canonicalized (sorted, deduplicated). The vocabulary is
/// exactly the set of labels that occur. `normalized()` is derived from the
/// data: true when every vector has unit L2 norm within 1e-5.
class CorpusStore {
 public:
  static constexpr double kUnitNormTolerance = 1e-5;

  CorpusStore(std::vector<PatentRecord> records, std::size_t dim);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }

  const PatentRecord &record(std::size_t i) const { return records_[i]; }
  std::span<const PatentRecord> records() const { return records_; }
  std::span<const float> vector(std::size_t i) const {
    return records_[i].vector;
  }
  /// L2 norm of record i, computed once at construction in double precision.
  double norm(std::size_t i) const { return norms_[i]; }
  /// Vocabulary indices of record i's labels, ascending.
  std::span<const std::uint32_t> label_indices(std::size_t i) const {
    return label_indices_[i];
  }
  const LabelVocabulary &vocabulary() const { return vocabulary_; }

  std::optional<std::size_t> find(const std::string &patent_id) const;

  friend bool operator==(const CorpusStore &a, const CorpusStore &b) {
    return a.dim_ == b.dim_ && a.records_ == b.records_;
  }

 private:
  std::vector<PatentRecord> records_;
  std::size_t dim_;
  LabelVocabulary vocabulary_;
  std::vector<std::vector<std::uint32_t>> label_indices_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> by_id_;
  bool normalized_ = false;
};

struct IngestReport {
  std::size_t lines_read = 0;  // non-blank lines
  std::size_t records = 0;
  std::size_t duplicates_dropped = 0;
  std::vector<std::string> duplicate_ids;  // one entry per dropped line
};

struct IngestResult {
  CorpusStore store;
  IngestReport report;
};

/// Reads one JSON record per line. Later lines repeating an earlier
/// patent_id are dropped and counted. Blank lines are skipped. Errors carry
/// the 1-based line number.
IngestResult ingest_jsonl(const std::filesystem::path &path,
                          std::optional<std::size_t> expected_dim = {});

/// Scales every vector to unit L2 norm. Idempotent. Throws naming the first
/// record whose vector is zero.
CorpusStore normalize(const CorpusStore &store);

struct FilterReport {
  std::size_t min_support = 0;
  std::vector<std::string> removed_labels;  // lexicographic
  std::size_t dropped_records = 0;
  std::size_t remaining_classes = 0;
};

inline constexpr std::size_t kDefaultMinSupport = 350;

/// Removes labels occurring on fewer than `min_support` records, then drops
/// records left with no label. min_support = 0 or 1 keeps everything.
std::pair<CorpusStore, FilterReport> filter_by_label_support(
    const CorpusStore &store, std::size_t min_support = kDefaultMinSupport);

/// Binary corpus file, little-endian:
///   "PSBE" | u32 version | u32 dim | u64 record count
///   | u32 vocabulary size | vocabulary size x (u16 length, UTF-8 code)
///   | per record: u16 id length, id bytes, u16 label count,
///     label count x u16 vocabulary index, dim x f32
///   | u32 CRC32 of every preceding byte.
/// Claim text is not part of the format.
inline constexpr std::uint32_t kCorpusFormatVersion = 1;

void save_binary(const CorpusStore &store, const std::filesystem::path &path);
CorpusStore load_binary(const std::filesystem::path &path);
std::vector<std::uint8_t> encode_binary(const CorpusStore &store);
CorpusStore decode_binary(std::span<const std::uint8_t> bytes);

struct LabelDistribution {
  std::map<std::string, std::size_t> counts;
  std::size_t total_assignments = 0;
  std::size_t records = 0;
  std::size_t min_count = 0;
  std::size_t max_count = 0;
  double mean_count = 0.0;
  double median_count = 0.0;
  double mean_labels_per_record = 0.0;
  /// Labels whose count is below the given support threshold.
  std::size_t below(std::size_t support) const;
};

LabelDistribution label_distribution(const CorpusStore &store);

}  // namespace patsim
