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
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mage/bytes.hpp"
#include "mage/mars_section.hpp"
#include "mage/sgx_measure.hpp"

namespace mage {

// Contiguous run of page-table entries holding the MARS.
struct MarsRange {
  std::uint64_t first_page = 0;
  std::uint64_t page_count = 0;

  bool operator==(const MarsRange&) const = default;
};

enum class Loader { kModified, kUnmodified };

std::string_view to_string(Loader l);
Loader loader_from_string(std::string_view name);

// An enclave as a flat, ordered page table. File order is the order the
// unmodified loader adds pages in.
struct EnclaveImage {
  EnclaveParams params;
  Variant variant = Variant::kBasic;
  std::vector<MeasuredPage> pages;
  std::optional<MarsRange> mars;

  bool has_mars() const { return mars.has_value(); }
  // Throw kMissingMars when there is no MARS.
  std::uint64_t mars_offset() const;
  std::uint64_t mars_bytes_size() const;
  Bytes mars_bytes() const;
  // Overwrites the MARS pages; size must equal mars_bytes_size().
  void set_mars_bytes(ByteView bytes);

  bool operator==(const EnclaveImage&) const = default;
};

// Header: "MAGEIMG1", version (= variant) u32, ssa_frame_pages u32,
// enclave_size u64, page_count u64, mars_first u64 (all-ones if absent),
// mars_count u64. Then page records of [offset u64][secinfo 64][content
// 4096]. All integers little-endian.
inline constexpr std::size_t kImageHeaderSize = 48;
inline constexpr std::size_t kPageRecordSize = 8 + 64 + kPageSize;
inline constexpr std::uint64_t kNoMars = ~std::uint64_t{0};

constexpr std::uint64_t image_file_size(std::uint64_t page_count) {
  return kImageHeaderSize + page_count * kPageRecordSize;
}

// Structural checks shared by parse and serialize.
void validate_image(const EnclaveImage& img);

EnclaveImage parse_image(ByteView bytes);
Bytes serialize_image(const EnclaveImage& img);

EnclaveImage read_image_file(const std::filesystem::path& path);
void write_image_file(const std::filesystem::path& path, const EnclaveImage& img);

// Same record layout as the page table, used for host-supplied content.
Bytes serialize_page_records(std::span<const MeasuredPage> pages);
std::vector<MeasuredPage> parse_page_records(ByteView bytes);

// Modified: every non-MARS page in file order, then the MARS pages.
// Unmodified: file order.
std::vector<MeasuredPage> load_order(const EnclaveImage& img, Loader loader);

// Pages in file order before and after the MARS.
std::vector<MeasuredPage> pages_before_mars(const EnclaveImage& img);
std::vector<MeasuredPage> pages_after_mars(const EnclaveImage& img);
std::vector<MeasuredPage> non_mars_pages(const EnclaveImage& img);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView bytes);

}  // namespace mage
