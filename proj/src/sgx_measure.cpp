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

#include "mage/sgx_measure.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>
#include <vector>

#include "mage/error.hpp"

namespace mage {
namespace {

constexpr std::uint64_t kEcreateTag = 0x0045544145524345ull;  // "ECREATE\0"
constexpr std::uint64_t kEaddTag = 0x0000000044444145ull;     // "EADD\0\0\0\0"
constexpr std::uint64_t kEextendTag = 0x00444E4554584545ull;  // "EEXTEND\0"

}  // namespace

std::array<std::uint8_t, 64> SecInfo::bytes() const {
  std::array<std::uint8_t, 64> out{};
  store_le64(out.data(), flags);
  return out;
}

SecInfo SecInfo::from_bytes(ByteView bytes) {
  if (bytes.size() != 64) {
    throw Error(ErrorKind::kInvalidArgument, "SECINFO must be 64 bytes");
  }
  if (std::any_of(bytes.begin() + 8, bytes.end(),
                  [](std::uint8_t b) { return b != 0; })) {
    throw Error(ErrorKind::kInvalidArgument, "SECINFO reserved bytes not zero");
  }
  return SecInfo{load_le64(bytes.data())};
}

void EnclaveParams::validate() const {
  if (enclave_size < kPageSize || !std::has_single_bit(enclave_size)) {
    throw Error(ErrorKind::kInvalidArgument,
                "enclave size must be a power of two of at least 4096 bytes");
  }
}

Block ecreate_block(const EnclaveParams& params) {
  Block b{};
  store_le64(b.data(), kEcreateTag);
  store_le32(b.data() + 8, params.ssa_frame_pages);
  store_le64(b.data() + 12, params.enclave_size);
  return b;
}

Block eadd_block(std::uint64_t offset, const SecInfo& secinfo) {
  if (offset % kPageSize != 0) {
    throw Error(ErrorKind::kMisaligned,
                "EADD offset " + std::to_string(offset) + " not page aligned");
  }
  Block b{};
  store_le64(b.data(), kEaddTag);
  store_le64(b.data() + 8, offset);
  const auto si = secinfo.bytes();
  std::memcpy(b.data() + 16, si.data(), kSecInfoMeasuredBytes);
  return b;
}

std::array<Block, 5> eextend_blocks(std::uint64_t offset, ByteView chunk) {
  if (offset % kChunkSize != 0) {
    throw Error(ErrorKind::kMisaligned,
                "EEXTEND offset " + std::to_string(offset) + " not 256-aligned");
  }
  if (chunk.size() != kChunkSize) {
    throw Error(ErrorKind::kInvalidArgument, "EEXTEND chunk must be 256 bytes");
  }
  std::array<Block, 5> out{};
  store_le64(out[0].data(), kEextendTag);
  store_le64(out[0].data() + 8, offset);
  for (int i = 0; i < 4; ++i) {
    std::memcpy(out[i + 1].data(), chunk.data() + 64 * i, 64);
  }
  return out;
}

void absorb_page(HashState& state, std::uint64_t offset, const SecInfo& secinfo,
                 ByteView content) {
  if (content.size() != kPageSize) {
    throw Error(ErrorKind::kInvalidArgument, "page content must be 4096 bytes");
  }
  state.absorb_block(eadd_block(offset, secinfo));
  // The chunk offset advances by 256 for every EEXTEND.
  for (std::size_t k = 0; k < kChunksPerPage; ++k) {
    Block header{};
    store_le64(header.data(), kEextendTag);
    store_le64(header.data() + 8, offset + kChunkSize * k);
    state.absorb_block(header);
    state.absorb_blocks(content.subspan(kChunkSize * k, kChunkSize));
  }
}

void validate_pages(const EnclaveParams& params,
                    std::span<const MeasuredPage> pages) {
  params.validate();
  std::vector<std::uint64_t> offsets;
  offsets.reserve(pages.size());
  for (const auto& p : pages) {
    if (p.offset % kPageSize != 0) {
      throw Error(ErrorKind::kMisaligned,
                  "page offset " + std::to_string(p.offset) + " not page aligned");
    }
    if (p.offset >= params.enclave_size ||
        params.enclave_size - p.offset < kPageSize) {
      throw Error(ErrorKind::kOutOfRange,
                  "page offset " + std::to_string(p.offset) +
                      " outside enclave of size " +
                      std::to_string(params.enclave_size));
    }
    offsets.push_back(p.offset);
  }
  std::sort(offsets.begin(), offsets.end());
  if (std::adjacent_find(offsets.begin(), offsets.end()) != offsets.end()) {
    throw Error(ErrorKind::kOverlap, "two pages share an offset");
  }
}

HashState premeasure_enclave(const EnclaveParams& params,
                             std::span<const MeasuredPage> pages) {
  validate_pages(params, pages);
  HashState state;
  state.absorb_block(ecreate_block(params));
  for (const auto& p : pages) absorb_page(state, p.offset, p.secinfo, p.content);
  return state;
}

Measurement measure_enclave(const EnclaveParams& params,
                            std::span<const MeasuredPage> pages) {
  return premeasure_enclave(params, pages).finalize();
}

}  // namespace mage
