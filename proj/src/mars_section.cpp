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

#include "mage/mars_section.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "mage/error.hpp"

namespace mage {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kBasic: return "basic";
    case Variant::kSplit: return "split";
    case Variant::kMerkle: return "merkle";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  if (name == "basic") return Variant::kBasic;
  if (name == "split") return Variant::kSplit;
  if (name == "merkle") return Variant::kMerkle;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown variant '" + std::string(name) + "'");
}

std::array<std::uint8_t, Mainfo::kSize> Mainfo::serialize() const {
  std::array<std::uint8_t, kSize> out{};
  std::memcpy(out.data(), premr.data(), 32);
  store_le64(out.data() + 32, count);
  store_le64(out.data() + 40, offset);
  return out;
}

Mainfo Mainfo::parse(ByteView bytes) {
  if (bytes.size() != kSize) {
    throw Error(ErrorKind::kInvalidArgument, "MAINFO record must be 48 bytes");
  }
  Mainfo m;
  std::memcpy(m.premr.data(), bytes.data(), 32);
  m.count = load_le64(bytes.data() + 32);
  m.offset = load_le64(bytes.data() + 40);
  return m;
}

Mainfo Mainfo::from_state(const HashState& state, std::uint64_t mars_offset) {
  return Mainfo{state.premr(), state.byte_count(), mars_offset};
}

HashState Mainfo::state() const {
  std::array<std::uint8_t, HashState::kSerializedSize> raw{};
  std::memcpy(raw.data(), premr.data(), 32);
  store_le64(raw.data() + 32, count);
  return HashState::deserialize(raw);
}

std::array<std::uint8_t, SplitMainfo::kSize> SplitMainfo::serialize() const {
  std::array<std::uint8_t, kSize> out{};
  const auto head = pre.serialize();
  std::memcpy(out.data(), head.data(), head.size());
  std::memcpy(out.data() + 48, post_digest.data(), 32);
  store_le64(out.data() + 80, post_pages);
  return out;
}

SplitMainfo SplitMainfo::parse(ByteView bytes) {
  if (bytes.size() != kSize) {
    throw Error(ErrorKind::kInvalidArgument, "split MAINFO record must be 88 bytes");
  }
  SplitMainfo m;
  m.pre = Mainfo::parse(bytes.first(48));
  std::memcpy(m.post_digest.data(), bytes.data() + 48, 32);
  m.post_pages = load_le64(bytes.data() + 80);
  return m;
}

Bytes MerkleRootSection::serialize() const {
  Bytes out(kPageSize, 0);
  store_le64(out.data(), leaf_count);
  std::memcpy(out.data() + 8, root.data(), 32);
  return out;
}

MerkleRootSection MerkleRootSection::parse(ByteView section) {
  if (section.size() != kPageSize) {
    throw Error(ErrorKind::kMalformedSection,
                "Merkle root section must be exactly one page");
  }
  if (!is_all_zero(section.subspan(40))) {
    throw Error(ErrorKind::kMalformedSection,
                "Merkle root section has trailing bytes");
  }
  MerkleRootSection s;
  s.leaf_count = load_le64(section.data());
  std::memcpy(s.root.data(), section.data() + 8, 32);
  if (s.leaf_count == 0) {
    throw Error(ErrorKind::kMalformedSection, "Merkle root over zero leaves");
  }
  return s;
}

std::size_t record_size(Variant v) {
  switch (v) {
    case Variant::kBasic: return Mainfo::kSize;
    case Variant::kSplit: return SplitMainfo::kSize;
    case Variant::kMerkle: return Mainfo::kSize;
  }
  return Mainfo::kSize;
}

bool is_all_zero(ByteView bytes) {
  return std::all_of(bytes.begin(), bytes.end(),
                     [](std::uint8_t b) { return b == 0; });
}

namespace {

std::uint64_t checked_count(ByteView section, std::size_t rec_size) {
  if (section.empty() || section.size() % kPageSize != 0) {
    throw Error(ErrorKind::kMalformedSection,
                "section length " + std::to_string(section.size()) +
                    " is not a non-zero multiple of 4096");
  }
  const std::uint64_t count = load_le64(section.data());
  const std::uint64_t cap = mars_capacity(section.size(), rec_size);
  if (count > cap) {
    throw Error(ErrorKind::kMalformedSection,
                "entry count " + std::to_string(count) + " exceeds capacity " +
                    std::to_string(cap));
  }
  return count;
}

}  // namespace

template <class Record>
Bytes encode_section(std::span<const Record> records, std::size_t section_pages) {
  const std::uint64_t cap =
      mars_capacity(section_pages * kPageSize, Record::kSize);
  if (records.size() > cap) {
    throw Error(ErrorKind::kCapacityExceeded,
                std::to_string(records.size()) + " entries do not fit a " +
                    std::to_string(section_pages) + "-page section (capacity " +
                    std::to_string(cap) + ", " +
                    std::to_string(mars_capacity(kPageSize, Record::kSize)) +
                    " per page)");
  }
  Bytes out(section_pages * kPageSize, 0);
  store_le64(out.data(), records.size());
  std::size_t pos = 8;
  for (const auto& r : records) {
    const auto raw = r.serialize();
    std::memcpy(out.data() + pos, raw.data(), raw.size());
    pos += raw.size();
  }
  return out;
}

template <class Record>
std::vector<Record> decode_section(ByteView section) {
  const std::uint64_t count = checked_count(section, Record::kSize);
  const std::size_t end = 8 + count * Record::kSize;
  if (!is_all_zero(section.subspan(end))) {
    throw Error(ErrorKind::kMalformedSection,
                "non-zero bytes after the last entry");
  }
  std::vector<Record> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    out.push_back(Record::parse(section.subspan(8 + i * Record::kSize, Record::kSize)));
  }
  return out;
}

template Bytes encode_section<Mainfo>(std::span<const Mainfo>, std::size_t);
template Bytes encode_section<SplitMainfo>(std::span<const SplitMainfo>, std::size_t);
template std::vector<Mainfo> decode_section<Mainfo>(ByteView);
template std::vector<SplitMainfo> decode_section<SplitMainfo>(ByteView);

std::uint64_t section_entry_count(ByteView section, Variant v) {
  if (v == Variant::kMerkle) return MerkleRootSection::parse(section).leaf_count;
  return checked_count(section, record_size(v));
}

void validate_section(ByteView section, Variant v) {
  if (section.empty() || section.size() % kPageSize != 0) {
    throw Error(ErrorKind::kMalformedSection, "section is not page granular");
  }
  if (is_all_zero(section)) return;
  switch (v) {
    case Variant::kBasic: decode_section<Mainfo>(section); break;
    case Variant::kSplit: decode_section<SplitMainfo>(section); break;
    case Variant::kMerkle: MerkleRootSection::parse(section); break;
  }
}

}  // namespace mage
