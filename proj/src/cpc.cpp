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

#include "patsim/cpc.hpp"

#include <algorithm>

#include "patsim/common.hpp"

namespace patsim {

namespace {
bool upper(char c) { return c >= 'A' && c <= 'Z'; }
bool digit(char c) { return c >= '0' && c <= '9'; }
}  // namespace

bool CpcCode::is_valid(std::string_view code) {
  return code.size() == 4 && upper(code[0]) && digit(code[1]) &&
         digit(code[2]) && upper(code[3]);
}

CpcCode::CpcCode(std::string_view code) : code_(code) {
  if (!is_valid(code)) {
    throw Error("invalid CPC code \"" + code_ + "\"");
  }
}

LabelVocabulary::LabelVocabulary(std::vector<CpcCode> codes)
    : codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
  index_.reserve(codes_.size());
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    index_.emplace(codes_[i].str(), i);
  }
}

std::optional<std::size_t> LabelVocabulary::index_of(
    const CpcCode &code) const {
  auto it = index_.find(code.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace patsim
