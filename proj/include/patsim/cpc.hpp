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

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace patsim {

/// A CPC subclass code such as "G06F": section letter, two-digit class,
/// subclass letter. Construction validates the pattern.
class CpcCode {
 public:
  /// Throws Error when `code` does not match [A-Z][0-9]{2}[A-Z].
  explicit CpcCode(std::string_view code);

  static bool is_valid(std::string_view code);

  const std::string &str() const { return code_; }
  char section() const { return code_[0]; }

  friend auto operator<=>(const CpcCode &, const CpcCode &) = default;
  friend bool operator==(const CpcCode &, const CpcCode &) = default;

 private:
  std::string code_;
};

/// Dense, lexicographically ordered code <-> index mapping.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  /// Codes are sorted and deduplicated.
  explicit LabelVocabulary(std::vector<CpcCode> codes);

  std::size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  const CpcCode &code(std::size_t index) const { return codes_.at(index); }
  std::optional<std::size_t> index_of(const CpcCode &code) const;
  std::span<const CpcCode> codes() const { return codes_; }

  friend bool operator==(const LabelVocabulary &a, const LabelVocabulary &b) {
    return a.codes_ == b.codes_;
  }

 private:
  std::vector<CpcCode> codes_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace patsim
