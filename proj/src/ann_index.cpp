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

#include "patsim/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "patsim/binary_io.hpp"
#include "patsim/common.hpp"

namespace patsim {

namespace {

constexpr char kIndexMagic[4] = {'P', 'S', 'A', 'I'};
constexpr std::uint32_t kLeafTag = 0xFFFFFFFFu;
constexpr std::uint32_t kForcedLeafTag = 0xFFFFFFFEu;
constexpr int kSplitAttempts = 4;  // one try plus three retries

double margin(std::span<const float> normal, float offset,
              std::span<const float> x) {
  double acc = offset;
  for (std::size_t d = 0; d < normal.size(); ++d) {
    acc += static_cast<double>(normal[d]) * x[d];
  }
  return acc;
}

// Tries to split `items` by the bisector of two distinct random members.
// On success fills node.normal/offset and the two sides.
bool try_split(const CorpusStore &store, std::span<const std::uint32_t> items,
               SplitMix64 &rng, AnnIndex::Node &node,
               std::vector<std::uint32_t> &left,
               std::vector<std::uint32_t> &right) {
  const std::size_t n = items.size();
  const std::size_t i = rng.below(n);
  std::size_t j = rng.below(n - 1);
  if (j >= i) ++j;
  const auto p = store.vector(items[i]);
  const auto q = store.vector(items[j]);
  const std::size_t dim = store.dim();

  std::vector<double> diff(dim);
  double norm2 = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    diff[d] = static_cast<double>(p[d]) - q[d];
    norm2 += diff[d] * diff[d];
  }
  if (norm2 == 0.0) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  node.normal.resize(dim);
  double off = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    node.normal[d] = static_cast<float>(diff[d] * inv);
    off -= static_cast<double>(node.normal[d]) * 0.5 *
           (static_cast<double>(p[d]) + q[d]);
  }
  node.offset = static_cast<float>(off);

  left.clear();
  right.clear();
  for (auto it : items) {
    if (margin(node.normal, node.offset, store.vector(it)) > 0.0) {
      right.push_back(it);
    } else {
      left.push_back(it);
    }
  }
  return !left.empty() && !right.empty();
}

AnnIndex::Tree build_tree(const CorpusStore &store, std::size_t leaf_size,
                          std::uint64_t seed) {
  SplitMix64 rng(seed);
  AnnIndex::Tree tree;
  struct Pending {
    std::uint32_t node;
    std::vector<std::uint32_t> items;
  };
  std::vector<std::uint32_t> all(store.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  tree.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all)});

  std::vector<std::uint32_t> left, right;
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    AnnIndex::Node node;
    bool split = false;
    if (cur.items.size() > leaf_size) {
      for (int attempt = 0; attempt < kSplitAttempts && !split; ++attempt) {
        split = try_split(store, cur.items, rng, node, left, right);
      }
    }
    if (!split) {
      node.leaf = true;
      node.forced = cur.items.size() > leaf_size;
      node.normal.clear();
      node.offset = 0.0f;
      node.items = std::move(cur.items);
      tree[cur.node] = std::move(node);
      continue;
    }
    node.children[0] = static_cast<std::uint32_t>(tree.size());
    node.children[1] = static_cast<std::uint32_t>(tree.size() + 1);
    tree.emplace_back();
    tree.emplace_back();
    // Right is pushed first so the left subtree is expanded first; this
    // only fixes node numbering, both orders are valid.
    stack.push_back({node.children[1], right});
    stack.push_back({node.children[0], left});
    tree[cur.node] = std::move(node);
  }
  return tree;
}

}  // namespace

std::size_t default_search_k(std::size_t k, std::size_t n_trees) {
  return 32 * k * n_trees;
}

AnnIndex AnnIndex::build(const CorpusStore &store, const AnnParams &params) {
  if (store.empty()) throw Error("empty corpus");
  if (params.n_trees < 1) throw Error("n_trees must be at least 1");
  if (params.leaf_size < 1) throw Error("leaf_size must be at least 1");
  if (!store.normalized()) {
    throw Error("ANN index requires a normalized corpus");
  }
  if (store.size() >= kForcedLeafTag) throw Error("corpus too large for index");

  AnnIndex index;
  index.params_ = params;
  index.dim_ = store.dim();
  index.count_ = store.size();
  index.trees_.resize(params.n_trees);
  parallel_for(params.n_trees, [&](std::size_t t) {
    index.trees_[t] =
        build_tree(store, params.leaf_size, mix_seed(params.seed, t));
  });
  return index;
}

std::vector<std::uint32_t> AnnIndex::candidates(std::span<const float> q,
                                                std::size_t search_k) const {
  struct Frontier {
    double priority;
    std::uint32_t tree;
    std::uint32_t node;
  };
  // Highest margin first; ties resolved by (tree, node) so traversal order
  // is fully determined.
  auto lower = [](const Frontier &a, const Frontier &b) {
    if (a.priority != b.priority) return a.priority < b.priority;
    if (a.tree != b.tree) return a.tree > b.tree;
    return a.node > b.node;
  };
  std::priority_queue<Frontier, std::vector<Frontier>, decltype(lower)> pq(
      lower);
  for (std::uint32_t t = 0; t < trees_.size(); ++t) {
    pq.push({std::numeric_limits<double>::infinity(), t, 0});
  }

  std::vector<bool> seen(count_, false);
  std::vector<std::uint32_t> out;
  while (out.size() < search_k && !pq.empty()) {
    const Frontier f = pq.top();
    pq.pop();
    const Node &node = trees_[f.tree][f.node];
    if (node.leaf) {
      for (auto it : node.items) {
        if (!seen[it]) {
          seen[it] = true;
          out.push_back(it);
        }
      }
      continue;
    }
    const double m = margin(node.normal, node.offset, q);
    pq.push({std::min(f.priority, m), f.tree, node.children[1]});
    pq.push({std::min(f.priority, -m), f.tree, node.children[0]});
  }
  return out;
}

NeighborList AnnIndex::query(const CorpusStore &store, std::span<const float> q,
                             std::size_t k, std::size_t search_k,
                             const std::optional<std::string> &exclude_id) const {
  if (store.size() != count_ || store.dim() != dim_) {
    throw Error("index was built for a different corpus");
  }
  if (q.size() != dim_) {
    throw Error("dimension mismatch: query has " + std::to_string(q.size()) +
                ", index has " + std::to_string(dim_));
  }
  if (k == 0) throw Error("k must be at least 1");
  if (search_k < k) throw Error("search_k must be at least k");
  const double qn = std::sqrt(dot(q, q));
  if (qn == 0.0) throw Error("cosine of a zero vector (query)");

  std::vector<Neighbor> scored;
  for (auto idx : candidates(q, search_k)) {
    const auto &id = store.record(idx).patent_id;
    if (exclude_id && id == *exclude_id) continue;
    scored.push_back({id, score_record(store, idx, q, qn, Metric::kCosine), idx});
  }
  const std::size_t keep = std::min(k, scored.size());
  auto before = [](const Neighbor &a, const Neighbor &b) {
    return ranks_before(Metric::kCosine, a, b);
  };
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), before);
  scored.resize(keep);

  NeighborList out;
  out.query_id = exclude_id;
  out.metric = Metric::kCosine;
  out.entries = std::move(scored);
  return out;
}

double recall_vs_exact(const AnnIndex &index, const CorpusStore &store,
                       std::span<const std::vector<float>> queries,
                       std::size_t k, std::size_t search_k) {
  if (queries.empty()) throw Error("recall needs at least one query");
  std::vector<double> per_query(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    const auto exact = top_k_exact(store, queries[i], k);
    const auto approx = index.query(store, queries[i], k, search_k);
    std::vector<bool> in_exact(store.size(), false);
    for (const auto &e : exact.entries) in_exact[e.record_index] = true;
    std::size_t hits = 0;
    for (const auto &e : approx.entries) hits += in_exact[e.record_index];
    per_query[i] = static_cast<double>(hits) /
                   static_cast<double>(exact.entries.size());
  });
  double sum = 0.0;
  for (double r : per_query) sum += r;
  return sum / static_cast<double>(queries.size());
}

std::vector<std::uint8_t> AnnIndex::encode() const {
  ByteWriter w;
  w.put_bytes(kIndexMagic, sizeof kIndexMagic);
  w.put_u32(kIndexFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(dim_));
  w.put_u64(count_);
  w.put_u32(static_cast<std::uint32_t>(params_.n_trees));
  w.put_u32(static_cast<std::uint32_t>(params_.leaf_size));
  w.put_u64(params_.seed);
  for (const auto &tree : trees_) {
    w.put_u32(static_cast<std::uint32_t>(tree.size()));
    for (const auto &node : tree) {
      if (node.leaf) {
        w.put_u32(node.forced ? kForcedLeafTag : kLeafTag);
        w.put_u32(static_cast<std::uint32_t>(node.items.size()));
        for (auto it : node.items) w.put_u32(it);
      } else {
        w.put_u32(node.children[0]);
        w.put_u32(node.children[1]);
        for (float x : node.normal) w.put_f32(x);
        w.put_f32(node.offset);
      }
    }
  }
  w.seal();
  return w.bytes();
}

AnnIndex AnnIndex::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kIndexMagic ||
      !std::equal(std::begin(kIndexMagic), std::end(kIndexMagic),
                  bytes.begin())) {
    throw Error("not an index file");
  }
  ByteReader r(bytes);
  r.skip(sizeof kIndexMagic);
  const std::uint32_t version = r.get_u32();
  if (version != kIndexFormatVersion) {
    throw Error("unsupported version " + std::to_string(version));
  }
  AnnIndex index;
  index.dim_ = r.get_u32();
  index.count_ = r.get_u64();
  index.params_.n_trees = r.get_u32();
  index.params_.leaf_size = r.get_u32();
  index.params_.seed = r.get_u64();
  if (index.params_.n_trees > r.remaining() / 8) throw Error("truncated file");
  index.trees_.resize(index.params_.n_trees);
  for (auto &tree : index.trees_) {
    const std::uint32_t n_nodes = r.get_u32();
    if (n_nodes > r.remaining() / 8) throw Error("truncated file");
    tree.resize(n_nodes);
    for (auto &node : tree) {
      const std::uint32_t tag = r.get_u32();
      if (tag == kLeafTag || tag == kForcedLeafTag) {
        node.leaf = true;
        node.forced = tag == kForcedLeafTag;
        const std::uint32_t n = r.get_u32();
        if (n > r.remaining() / 4) throw Error("truncated file");
        node.items.resize(n);
        for (auto &it : node.items) it = r.get_u32();
      } else {
        node.children[0] = tag;
        node.children[1] = r.get_u32();
        if (index.dim_ > r.remaining() / 4) throw Error("truncated file");
        node.normal.resize(index.dim_);
        for (auto &x : node.normal) x = r.get_f32();
        node.offset = r.get_f32();
      }
    }
  }
  verify_trailer(bytes, r);

  for (const auto &tree : index.trees_) {
    if (tree.empty()) throw Error("corrupt file: empty tree");
    for (std::size_t n = 0; n < tree.size(); ++n) {
      const auto &node = tree[n];
      if (node.leaf) {
        for (auto it : node.items) {
          if (it >= index.count_) throw Error("corrupt file: record index");
        }
      } else if (node.children[0] <= n || node.children[1] <= n ||
                 node.children[0] >= tree.size() ||
                 node.children[1] >= tree.size()) {
        throw Error("corrupt file: child reference");
      }
    }
  }
  return index;
}

void AnnIndex::save(const std::filesystem::path &path) const {
  write_file_bytes(path, encode());
}

AnnIndex AnnIndex::load(const std::filesystem::path &path) {
  return decode(read_file_bytes(path));
}

}  // namespace patsim
