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

// Reference computations written directly from the block layouts, sharing
// no code with the library. Hashing goes through OpenSSL's one-shot SHA256.
#pragma once

#include <openssl/sha.h>

#include <cstring>
#include <span>
#include <vector>

#include "mage/enclave_image.hpp"

namespace oracle {

using mage::Bytes;
using mage::Digest;

inline Digest sha256(std::span<const std::uint8_t> data) {
  Digest d{};
  SHA256(data.data(), data.size(), d.data());
  return d;
}

inline void put_le(Bytes& out, std::size_t at, std::uint64_t v, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline Bytes ecreate(std::uint32_t ssa, std::uint64_t size) {
  Bytes b(64, 0);
  std::memcpy(b.data(), "ECREATE", 8);  // includes the terminating NUL
  put_le(b, 8, ssa, 4);
  put_le(b, 12, size, 8);
  return b;
}

inline void add_page(Bytes& blob, std::uint64_t offset, std::uint64_t flags,
                     std::span<const std::uint8_t> content) {
  Bytes eadd(64, 0);
  std::memcpy(eadd.data(), "EADD", 4);
  put_le(eadd, 8, offset, 8);
  put_le(eadd, 16, flags, 8);
  blob.insert(blob.end(), eadd.begin(), eadd.end());
  for (std::size_t c = 0; c < 16; ++c) {
    Bytes hdr(64, 0);
    std::memcpy(hdr.data(), "EEXTEND", 8);
    put_le(hdr, 8, offset + 256 * c, 8);
    blob.insert(blob.end(), hdr.begin(), hdr.end());
    blob.insert(blob.end(), content.begin() + 256 * c, content.begin() + 256 * (c + 1));
  }
}

// All blocks of a load, before padding.
inline Bytes measurement_blocks(const mage::EnclaveParams& params,
                                const std::vector<mage::MeasuredPage>& pages) {
  Bytes blob = ecreate(params.ssa_frame_pages, params.enclave_size);
  for (const auto& p : pages) add_page(blob, p.offset, p.secinfo.flags, p.content);
  return blob;
}

inline Digest measure(const mage::EnclaveParams& params,
                      const std::vector<mage::MeasuredPage>& pages) {
  return sha256(measurement_blocks(params, pages));
}

// Non-MARS pages in file order, then the MARS pages.
inline std::vector<mage::MeasuredPage> modified_order(const mage::EnclaveImage& img) {
  if (!img.mars) return img.pages;
  std::vector<mage::MeasuredPage> head, tail;
  for (std::size_t i = 0; i < img.pages.size(); ++i) {
    const bool in_mars =
        i >= img.mars->first_page && i < img.mars->first_page + img.mars->page_count;
    (in_mars ? tail : head).push_back(img.pages[i]);
  }
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

inline Digest measure_modified(const mage::EnclaveImage& img) {
  return measure(img.params, modified_order(img));
}

inline Digest measure_unmodified(const mage::EnclaveImage& img) {
  return measure(img.params, img.pages);
}

}  // namespace oracle
