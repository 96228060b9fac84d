// Copyright 2026 The Mage Authors
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

#include "mage/merkle.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "mage/error.hpp"
#include "mage/hash_engine.hpp"

namespace mage {

Digest merkle_leaf_hash(std::uint64_t index, const Mainfo& entry) {
  std::array<std::uint8_t, 8 + Mainfo::kSize> buf{};
  store_le64(buf.data(), index);
  const auto rec = entry.serialize();
  std::memcpy(buf.data() + 8, rec.data(), rec.size());
  return sha256(buf);
}

Digest merkle_node_hash(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 64> buf;
  std::memcpy(buf.data(), left.data(), 32);
  std::memcpy(buf.data() + 32, right.data(), 32);
  return sha256(buf);
}

std::size_t merkle_depth(std::uint64_t leaf_count) {
  if (leaf_count <= 1) return 0;
  return static_cast<std::size_t>(std::bit_width(leaf_count - 1));
}

namespace {

std::vector<Digest> padded_leaves(const std::vector<Mainfo>& entries,
                                  bool parallel) {
  if (entries.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "Merkle tree needs at least one entry");
  }
  const std::size_t n = entries.size();
  const std::size_t width = std::size_t{1} << merkle_depth(n);
  std::vector<Digest> leaves(width);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    leaves[i] = merkle_leaf_hash(static_cast<std::uint64_t>(i), entries[i]);
  }
  for (std::size_t i = n; i < width; ++i) leaves[i] = leaves[n - 1];
  return leaves;
}

std::vector<Digest> next_level(const std::vector<Digest>& below, bool parallel) {
  std::vector<Digest> up(below.size() / 2);
  const auto count = static_cast<std::int64_t>(up.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    up[i] = merkle_node_hash(below[2 * i], below[2 * i + 1]);
  }
  return up;
}

}  // namespace

MerkleTree MerkleTree::build(std::vector<Mainfo> entries) {
  MerkleTree t;
  t.levels_.push_back(padded_leaves(entries, true));
  while (t.levels_.back().size() > 1) {
    t.levels_.push_back(next_level(t.levels_.back(), true));
  }
  t.entries_ = std::move(entries);
  return t;
}

MerkleTree MerkleTree::build_serial(std::vector<Mainfo> entries) {
  MerkleTree t;
  t.levels_.push_back(padded_leaves(entries, false));
  while (t.levels_.back().size() > 1) {
    t.levels_.push_back(next_level(t.levels_.back(), false));
  }
  t.entries_ = std::move(entries);
  return t;
}

std::vector<Digest> MerkleTree::proof(std::uint64_t index) const {
  if (index >= leaf_count()) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "leaf " + std::to_string(index) + " of " +
                    std::to_string(leaf_count()));
  }
  std::vector<Digest> path;
  path.reserve(depth());
  std::uint64_t pos = index;
  for (std::size_t level = 0; level < depth(); ++level) {
    path.push_back(levels_[level][pos ^ 1]);
    pos >>= 1;
  }
  return path;
}

Digest merkle_root_from_proof(std::uint64_t leaf_count, std::uint64_t index,
                              const Mainfo& entry, std::span<const Digest> proof) {
  if (proof.size() != merkle_depth(leaf_count)) {
    throw Error(ErrorKind::kProofInvalid,
                "proof has " + std::to_string(proof.size()) + " nodes, expected " +
                    std::to_string(merkle_depth(leaf_count)));
  }
  Digest node = merkle_leaf_hash(index, entry);
  std::uint64_t pos = index;
  for (const Digest& sibling : proof) {
    node = (pos & 1) ? merkle_node_hash(sibling, node)
                     : merkle_node_hash(node, sibling);
    pos >>= 1;
  }
  return node;
}

bool merkle_verify(const MerkleRootSection& root, std::uint64_t index,
                   const Mainfo& entry, std::span<const Digest> proof) {
  if (index >= root.leaf_count || proof.size() != merkle_depth(root.leaf_count)) {
    return false;
  }
  return merkle_root_from_proof(root.leaf_count, index, entry, proof) == root.root;
}

MerkleSidecar MerkleSidecar::from_tree(const MerkleTree& tree) {
  MerkleSidecar s;
  s.entries = tree.entries();
  for (std::uint64_t i = 0; i < tree.leaf_count(); ++i) {
    s.proofs.push_back(tree.proof(i));
  }
  return s;
}

Bytes MerkleSidecar::serialize() const {
  Bytes out(8, 0);
  store_le64(out.data(), entries.size());
  for (const auto& e : entries) append(out, e.serialize());
  for (const auto& p : proofs) {
    for (const auto& node : p) append(out, node);
  }
  return out;
}

MerkleSidecar MerkleSidecar::parse(ByteView bytes) {
  if (bytes.size() < 8) throw Error(ErrorKind::kTruncated, "sidecar too short");
  const std::uint64_t n = load_le64(bytes.data());
  if (n == 0 || n > (bytes.size() - 8) / Mainfo::kSize) {
    throw Error(ErrorKind::kTruncated, "sidecar leaf count does not fit the file");
  }
  const std::size_t depth = merkle_depth(n);
  const std::size_t expected = 8 + n * Mainfo::kSize + n * depth * 32;
  if (bytes.size() != expected) {
    throw Error(ErrorKind::kTruncated,
                "sidecar length " + std::to_string(bytes.size()) +
                    " does not match " + std::to_string(n) + " leaves");
  }
  MerkleSidecar s;
  std::size_t pos = 8;
  for (std::uint64_t i = 0; i < n; ++i, pos += Mainfo::kSize) {
    s.entries.push_back(Mainfo::parse(bytes.subspan(pos, Mainfo::kSize)));
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<Digest> p(depth);
    for (auto& node : p) {
      std::memcpy(node.data(), bytes.data() + pos, 32);
      pos += 32;
    }
    s.proofs.push_back(std::move(p));
  }
  return s;
}

}  // namespace mage
