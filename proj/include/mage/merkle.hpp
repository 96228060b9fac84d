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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mage/bytes.hpp"
#include "mage/mars_section.hpp"

namespace mage {

// Binary Merkle tree over MAINFO records. Leaves are
// sha256(index LE 8 || record 48); the leaf level is padded to a power of
// two by repeating the last leaf hash; internal nodes are sha256(left||right).
Digest merkle_leaf_hash(std::uint64_t index, const Mainfo& entry);
Digest merkle_node_hash(const Digest& left, const Digest& right);

// ceil(log2 n); 0 for a single leaf.
std::size_t merkle_depth(std::uint64_t leaf_count);

class MerkleTree {
 public:
  // Throws kInvalidArgument on an empty entry list. Levels above the leaves
  // are hashed in parallel.
  static MerkleTree build(std::vector<Mainfo> entries);
  // Single-threaded reference construction.
  static MerkleTree build_serial(std::vector<Mainfo> entries);

  const Digest& root() const { return levels_.back().front(); }
  std::uint64_t leaf_count() const { return entries_.size(); }
  std::size_t depth() const { return levels_.size() - 1; }
  const std::vector<Mainfo>& entries() const { return entries_; }

  // Sibling hashes from leaf to root. Throws kIndexOutOfRange.
  std::vector<Digest> proof(std::uint64_t index) const;

  MerkleRootSection root_section() const { return {leaf_count(), root()}; }

 private:
  MerkleTree() = default;
  std::vector<Mainfo> entries_;
  std::vector<std::vector<Digest>> levels_;  // levels_[0] = padded leaves
};

// Root implied by a leaf and its path. Throws kProofInvalid when the path
// length is not merkle_depth(leaf_count).
Digest merkle_root_from_proof(std::uint64_t leaf_count, std::uint64_t index,
                              const Mainfo& entry, std::span<const Digest> proof);

bool merkle_verify(const MerkleRootSection& root, std::uint64_t index,
                   const Mainfo& entry, std::span<const Digest> proof);

// Sidecar file kept in untrusted storage:
// [leaf_count 8 LE][entries 48 each][proofs, 32 bytes per node, leaf to root]
struct MerkleSidecar {
  std::vector<Mainfo> entries;
  std::vector<std::vector<Digest>> proofs;

  static MerkleSidecar from_tree(const MerkleTree& tree);
  Bytes serialize() const;
  static MerkleSidecar parse(ByteView bytes);

  bool operator==(const MerkleSidecar&) const = default;
};

}  // namespace mage
