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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patsim/corpus.hpp"
#include "patsim/similarity.hpp"

namespace patsim {

struct AnnParams {
  std::size_t n_trees = 16;
  std::size_t leaf_size = 32;
  std::uint64_t seed = 42;

  friend bool operator==(const AnnParams &, const AnnParams &) = default;
};

/// search_k used when the caller does not choose one: 32 * k * n_trees.
std::size_t default_search_k(std::size_t k, std::size_t n_trees);

/// Random-projection forest over the angular space of a normalized corpus.
///
/// Each internal node splits its point set by the perpendicular bisector of
/// two distinct random members. A node becomes a leaf when it holds at most
/// `leaf_size` points, or after four consecutive split attempts leave one
/// side empty (a forced leaf, e.g. many identical vectors). The index keeps
/// only tree structure; queries rerank candidates against the corpus it was
/// built from.
class AnnIndex {
 public:
  struct Node {
    // Split node: children[0] holds margin <= 0, children[1] margin > 0.
    std::uint32_t children[2] = {0, 0};
    std::vector<float> normal;
    float offset = 0.0f;
    // Leaf node.
    bool leaf = false;
    bool forced = false;
    std::vector<std::uint32_t> items;

    friend bool operator==(const Node &, const Node &) = default;
  };
  using Tree = std::vector<Node>;  // root is node 0

  static AnnIndex build(const CorpusStore &store, const AnnParams &params = {});

  /// Best-first search across all trees, then exact cosine rerank of the
  /// gathered candidates. Candidates are collected until at least
  /// `search_k` distinct records are seen or every tree is exhausted.
  NeighborList query(const CorpusStore &store, std::span<const float> q,
                     std::size_t k, std::size_t search_k,
                     const std::optional<std::string> &exclude_id = {}) const;

  /// Raw candidate set for a query, in discovery order, deduplicated.
  std::vector<std::uint32_t> candidates(std::span<const float> q,
                                        std::size_t search_k) const;

  const AnnParams &params() const { return params_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }
  std::span<const Tree> trees() const { return trees_; }

  void save(const std::filesystem::path &path) const;
  static AnnIndex load(const std::filesystem::path &path);
  std::vector<std::uint8_t> encode() const;
  static AnnIndex decode(std::span<const std::uint8_t> bytes);

  friend bool operator==(const AnnIndex &, const AnnIndex &) = default;

 private:
  AnnParams params_;
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<Tree> trees_;
};

/// Mean over queries of |ANN top-k ∩ exact top-k| / min(k, N).
double recall_vs_exact(const AnnIndex &index, const CorpusStore &store,
                       std::span<const std::vector<float>> queries,
                       std::size_t k, std::size_t search_k);

inline constexpr std::uint32_t kIndexFormatVersion = 1;

}  // namespace patsim
