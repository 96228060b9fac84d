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

#include "mage/bytes.hpp"
#include "mage/hash_engine.hpp"

namespace mage {

inline constexpr std::size_t kChunkSize = 256;
inline constexpr std::size_t kChunksPerPage = kPageSize / kChunkSize;
// One EADD block plus five blocks for each of the 16 EEXTEND chunks.
inline constexpr std::size_t kBlocksPerPage = 1 + 5 * kChunksPerPage;
inline constexpr std::size_t kSecInfoMeasuredBytes = 48;

enum class PageType : std::uint8_t { kSecs = 0, kTcs = 1, kReg = 2 };

namespace perm {
inline constexpr std::uint64_t kRead = 1u << 0;
inline constexpr std::uint64_t kWrite = 1u << 1;
inline constexpr std::uint64_t kExecute = 1u << 2;
}  // namespace perm

// 64-byte SECINFO; only the flags word is ever non-zero.
struct SecInfo {
  std::uint64_t flags = 0;

  static SecInfo make(PageType type, std::uint64_t permissions) {
    return SecInfo{(static_cast<std::uint64_t>(type) << 8) | (permissions & 0x7)};
  }
  static SecInfo reg(std::uint64_t permissions) {
    return make(PageType::kReg, permissions);
  }
  static SecInfo tcs() { return make(PageType::kTcs, 0); }
  // The constant SECINFO of MARS pages: REG, read-only.
  static SecInfo read_only() { return reg(perm::kRead); }

  PageType type() const { return static_cast<PageType>((flags >> 8) & 0xff); }
  std::uint64_t permissions() const { return flags & 0x7; }

  std::array<std::uint8_t, 64> bytes() const;
  static SecInfo from_bytes(ByteView bytes);  // rejects non-zero reserved bytes

  bool operator==(const SecInfo&) const = default;
};

using PageContent = std::array<std::uint8_t, kPageSize>;

struct MeasuredPage {
  std::uint64_t offset = 0;
  SecInfo secinfo;
  PageContent content{};

  bool operator==(const MeasuredPage&) const = default;
};

struct EnclaveParams {
  std::uint32_t ssa_frame_pages = 1;
  std::uint64_t enclave_size = 0;

  // enclave_size must be a power of two and at least one page.
  void validate() const;
  bool operator==(const EnclaveParams&) const = default;
};

Block ecreate_block(const EnclaveParams& params);
// Throws kMisaligned unless offset is page aligned.
Block eadd_block(std::uint64_t offset, const SecInfo& secinfo);
// Throws kMisaligned unless offset is 256-aligned, kInvalidArgument unless
// chunk is 256 bytes.
std::array<Block, 5> eextend_blocks(std::uint64_t offset, ByteView chunk);

// Absorbs the 81 blocks EADD+EEXTEND produce for one page.
void absorb_page(HashState& state, std::uint64_t offset, const SecInfo& secinfo,
                 ByteView content);

// Checks alignment, bounds and overlap of a page list.
void validate_pages(const EnclaveParams& params,
                    std::span<const MeasuredPage> pages);

// State after ECREATE and every page in order, not finalized.
HashState premeasure_enclave(const EnclaveParams& params,
                             std::span<const MeasuredPage> pages);

Measurement measure_enclave(const EnclaveParams& params,
                            std::span<const MeasuredPage> pages);

// Byte count after ECREATE plus n pages: 64 * (1 + 81 n).
constexpr std::uint64_t premeasure_byte_count(std::uint64_t pages) {
  return kBlockSize * (1 + kBlocksPerPage * pages);
}

}  // namespace mage
