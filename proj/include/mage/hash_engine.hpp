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

#include <array>
#include <cstdint>

#include "mage/bytes.hpp"

namespace mage {

// Intermediate SHA-256 state that can be exported, shipped around and
// resumed. Only whole 64-byte blocks are absorbed, so byte_count is always
// a multiple of 64.
class HashState {
 public:
  static constexpr std::size_t kSerializedSize = 40;
  using Serialized = std::array<std::uint8_t, kSerializedSize>;

  // The FIPS 180-4 initial hash value, nothing absorbed.
  HashState();

  const std::array<std::uint32_t, 8>& words() const { return words_; }
  std::uint64_t byte_count() const { return byte_count_; }

  // Throws kInvalidArgument unless block.size() == 64.
  void absorb_block(ByteView block);
  // Throws kInvalidArgument unless data.size() is a multiple of 64.
  void absorb_blocks(ByteView data);

  // 8 words big-endian, then byte_count little-endian.
  Serialized serialize() const;
  // Rejects wrong length and byte counts that are not block multiples.
  static HashState deserialize(ByteView bytes);

  // Standard Merkle-Damgard padding with byte_count * 8 bits. Consuming:
  // callers that want to keep the state finalize a copy.
  Digest finalize() &&;

  // Words as they appear in a digest, i.e. the first 32 serialized bytes.
  Digest premr() const;

  bool operator==(const HashState&) const = default;

 private:
  std::array<std::uint32_t, 8> words_;
  std::uint64_t byte_count_ = 0;
};

// Free-function spellings of the same operations.
inline HashState hs_init() { return HashState{}; }
HashState hs_update_block(HashState state, ByteView block);
inline HashState::Serialized hs_export(const HashState& s) { return s.serialize(); }
inline HashState hs_import(ByteView bytes) { return HashState::deserialize(bytes); }
inline Digest hs_finalize(HashState s) { return std::move(s).finalize(); }

// One-shot SHA-256 over an arbitrary-length message, built on the same
// compression function. Used for protocol hashes and Merkle nodes.
Digest sha256(ByteView message);

}  // namespace mage
