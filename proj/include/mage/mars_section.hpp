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
#include <span>
#include <vector>

#include "mage/bytes.hpp"
#include "mage/hash_engine.hpp"

namespace mage {

// How a group lays out its MARS. Stored in the image header's version field.
enum class Variant : std::uint32_t {
  kBasic = 1,   // entries are Mainfo records
  kSplit = 2,   // entries are SplitMainfo records, unmodified loader
  kMerkle = 3,  // one page holding the root over externally stored Mainfos
};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

// Everything needed to resume and finish another enclave's measurement.
// SECINFO is the fixed read-only REG value and is not serialized.
struct Mainfo {
  static constexpr std::size_t kSize = 48;

  Digest premr{};
  std::uint64_t count = 0;   // bytes absorbed into premr
  std::uint64_t offset = 0;  // byte offset of that enclave's MARS

  // [premr 32][count 8 LE][offset 8 LE]
  std::array<std::uint8_t, kSize> serialize() const;
  static Mainfo parse(ByteView bytes);

  static Mainfo from_state(const HashState& state, std::uint64_t mars_offset);
  HashState state() const;

  bool operator==(const Mainfo&) const = default;
};

// Record for groups loaded by the unmodified loader: the pages after the
// MARS are supplied by the host and checked against post_digest.
struct SplitMainfo {
  static constexpr std::size_t kSize = 88;

  Mainfo pre;                 // state over the pages before the MARS
  Digest post_digest{};       // sha256 of the serialized post-MARS page records
  std::uint64_t post_pages = 0;

  // [premr 32][count 8][offset 8][post_digest 32][post_pages 8]
  std::array<std::uint8_t, kSize> serialize() const;
  static SplitMainfo parse(ByteView bytes);

  bool operator==(const SplitMainfo&) const = default;
};

// The single-page MARS of the Merkle variant: [leaf_count 8 LE][root 32].
struct MerkleRootSection {
  std::uint64_t leaf_count = 0;
  Digest root{};

  Bytes serialize() const;  // one page, zero padded
  static MerkleRootSection parse(ByteView section);

  bool operator==(const MerkleRootSection&) const = default;
};

// floor((L - 8) / record_size)
constexpr std::uint64_t mars_capacity(std::uint64_t section_bytes,
                                      std::uint64_t record_size = Mainfo::kSize) {
  return section_bytes < 8 ? 0 : (section_bytes - 8) / record_size;
}

// ceil((record_size * N + 8) / 4096)
constexpr std::uint64_t mars_pages_needed(std::uint64_t entries,
                                          std::uint64_t record_size = Mainfo::kSize) {
  return (record_size * entries + 8 + kPageSize - 1) / kPageSize;
}

std::size_t record_size(Variant v);

// Serialized record list: [count 8 LE][records...][zeros to section_pages
// pages]. Throws kCapacityExceeded if the records do not fit.
template <class Record>
Bytes encode_section(std::span<const Record> records, std::size_t section_pages);

// Inverse of encode_section. Throws kMalformedSection when the count exceeds
// the capacity, the length is not page granular, or trailing bytes are set.
template <class Record>
std::vector<Record> decode_section(ByteView section);

// Reads and bounds-checks the entry count without decoding the records.
std::uint64_t section_entry_count(ByteView section, Variant v);

bool is_all_zero(ByteView bytes);

// True if the bytes are a valid section of the given variant or all zero
// (the placeholder before instrumentation).
void validate_section(ByteView section, Variant v);

}  // namespace mage
