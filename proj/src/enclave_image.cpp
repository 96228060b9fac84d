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

#include "mage/enclave_image.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mage/error.hpp"

namespace mage {
namespace {

constexpr char kMagic[8] = {'M', 'A', 'G', 'E', 'I', 'M', 'G', '1'};

MeasuredPage parse_record(const std::uint8_t* rec) {
  MeasuredPage p;
  p.offset = load_le64(rec);
  p.secinfo = SecInfo::from_bytes(ByteView(rec + 8, 64));
  std::memcpy(p.content.data(), rec + 72, kPageSize);
  return p;
}

void write_record(std::uint8_t* rec, const MeasuredPage& p) {
  store_le64(rec, p.offset);
  const auto si = p.secinfo.bytes();
  std::memcpy(rec + 8, si.data(), si.size());
  std::memcpy(rec + 72, p.content.data(), kPageSize);
}

}  // namespace

std::string_view to_string(Loader l) {
  return l == Loader::kModified ? "modified" : "unmodified";
}

Loader loader_from_string(std::string_view name) {
  if (name == "modified") return Loader::kModified;
  if (name == "unmodified") return Loader::kUnmodified;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown loader '" + std::string(name) + "'");
}

std::uint64_t EnclaveImage::mars_offset() const {
  if (!mars) throw Error(ErrorKind::kMissingMars, "image has no MARS section");
  return pages.at(mars->first_page).offset;
}

std::uint64_t EnclaveImage::mars_bytes_size() const {
  if (!mars) throw Error(ErrorKind::kMissingMars, "image has no MARS section");
  return mars->page_count * kPageSize;
}

Bytes EnclaveImage::mars_bytes() const {
  Bytes out;
  out.reserve(mars_bytes_size());
  for (std::uint64_t i = 0; i < mars->page_count; ++i) {
    const auto& c = pages.at(mars->first_page + i).content;
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

void EnclaveImage::set_mars_bytes(ByteView bytes) {
  if (bytes.size() != mars_bytes_size()) {
    throw Error(ErrorKind::kSizeMismatch,
                "MARS content of " + std::to_string(bytes.size()) +
                    " bytes does not fit a " +
                    std::to_string(mars_bytes_size()) + "-byte section");
  }
  for (std::uint64_t i = 0; i < mars->page_count; ++i) {
    std::memcpy(pages.at(mars->first_page + i).content.data(),
                bytes.data() + i * kPageSize, kPageSize);
  }
}

void validate_image(const EnclaveImage& img) {
  validate_pages(img.params, img.pages);
  if (!img.mars) return;

  const auto& r = *img.mars;
  if (r.page_count == 0 || r.first_page >= img.pages.size() ||
      img.pages.size() - r.first_page < r.page_count) {
    throw Error(ErrorKind::kMarsOutOfBounds,
                "MARS range [" + std::to_string(r.first_page) + ", +" +
                    std::to_string(r.page_count) + ") outside page table of " +
                    std::to_string(img.pages.size()) + " pages");
  }
  const std::uint64_t base = img.pages[r.first_page].offset;
  for (std::uint64_t i = 0; i < r.page_count; ++i) {
    const auto& p = img.pages[r.first_page + i];
    if (p.offset != base + i * kPageSize) {
      throw Error(ErrorKind::kMarsOutOfBounds,
                  "MARS pages are not contiguous in the enclave range");
    }
    if (p.secinfo != SecInfo::read_only()) {
      throw Error(ErrorKind::kMalformedSection,
                  "MARS pages must be read-only REG pages");
    }
  }
  validate_section(img.mars_bytes(), img.variant);
}

EnclaveImage parse_image(ByteView bytes) {
  if (bytes.size() < kImageHeaderSize) {
    throw Error(ErrorKind::kTruncated, "image shorter than its header");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::kBadMagic, "not a MAGEIMG1 image");
  }
  const std::uint8_t* h = bytes.data();
  const std::uint32_t version = load_le32(h + 8);
  if (version < 1 || version > 3) {
    throw Error(ErrorKind::kBadVersion,
                "unsupported image version " + std::to_string(version));
  }

  EnclaveImage img;
  img.variant = static_cast<Variant>(version);
  img.params.ssa_frame_pages = load_le32(h + 12);
  img.params.enclave_size = load_le64(h + 16);
  const std::uint64_t page_count = load_le64(h + 24);
  const std::uint64_t mars_first = load_le64(h + 32);
  const std::uint64_t mars_count = load_le64(h + 40);

  if (page_count > (bytes.size() - kImageHeaderSize) / kPageRecordSize ||
      bytes.size() != image_file_size(page_count)) {
    throw Error(ErrorKind::kTruncated,
                "image length " + std::to_string(bytes.size()) +
                    " does not match " + std::to_string(page_count) + " pages");
  }

  img.pages.reserve(page_count);
  for (std::uint64_t i = 0; i < page_count; ++i) {
    img.pages.push_back(
        parse_record(bytes.data() + kImageHeaderSize + i * kPageRecordSize));
  }
  if (mars_first != kNoMars) {
    img.mars = MarsRange{mars_first, mars_count};
  } else if (mars_count != 0) {
    throw Error(ErrorKind::kMarsOutOfBounds, "MARS count set without a MARS");
  }
  validate_image(img);
  return img;
}

Bytes serialize_image(const EnclaveImage& img) {
  validate_image(img);
  Bytes out(image_file_size(img.pages.size()), 0);
  std::uint8_t* h = out.data();
  std::memcpy(h, kMagic, sizeof(kMagic));
  store_le32(h + 8, static_cast<std::uint32_t>(img.variant));
  store_le32(h + 12, img.params.ssa_frame_pages);
  store_le64(h + 16, img.params.enclave_size);
  store_le64(h + 24, img.pages.size());
  store_le64(h + 32, img.mars ? img.mars->first_page : kNoMars);
  store_le64(h + 40, img.mars ? img.mars->page_count : 0);
  for (std::size_t i = 0; i < img.pages.size(); ++i) {
    write_record(out.data() + kImageHeaderSize + i * kPageRecordSize, img.pages[i]);
  }
  return out;
}

Bytes serialize_page_records(std::span<const MeasuredPage> pages) {
  Bytes out(pages.size() * kPageRecordSize);
  for (std::size_t i = 0; i < pages.size(); ++i) {
    write_record(out.data() + i * kPageRecordSize, pages[i]);
  }
  return out;
}

std::vector<MeasuredPage> parse_page_records(ByteView bytes) {
  if (bytes.size() % kPageRecordSize != 0) {
    throw Error(ErrorKind::kTruncated, "page records are not 4168-byte granular");
  }
  std::vector<MeasuredPage> out;
  for (std::size_t off = 0; off < bytes.size(); off += kPageRecordSize) {
    out.push_back(parse_record(bytes.data() + off));
  }
  return out;
}

std::vector<MeasuredPage> pages_before_mars(const EnclaveImage& img) {
  if (!img.mars) throw Error(ErrorKind::kMissingMars, "image has no MARS section");
  return {img.pages.begin(),
          img.pages.begin() + static_cast<std::ptrdiff_t>(img.mars->first_page)};
}

std::vector<MeasuredPage> pages_after_mars(const EnclaveImage& img) {
  if (!img.mars) throw Error(ErrorKind::kMissingMars, "image has no MARS section");
  return {img.pages.begin() +
              static_cast<std::ptrdiff_t>(img.mars->first_page + img.mars->page_count),
          img.pages.end()};
}

std::vector<MeasuredPage> non_mars_pages(const EnclaveImage& img) {
  if (!img.mars) return img.pages;
  auto out = pages_before_mars(img);
  auto after = pages_after_mars(img);
  out.insert(out.end(), after.begin(), after.end());
  return out;
}

std::vector<MeasuredPage> load_order(const EnclaveImage& img, Loader loader) {
  if (loader == Loader::kUnmodified || !img.mars) return img.pages;
  auto out = non_mars_pages(img);
  const auto first = img.pages.begin() + static_cast<std::ptrdiff_t>(img.mars->first_page);
  out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(img.mars->page_count));
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

EnclaveImage read_image_file(const std::filesystem::path& path) {
  return parse_image(read_file(path));
}

void write_image_file(const std::filesystem::path& path, const EnclaveImage& img) {
  write_file(path, serialize_image(img));
}

}  // namespace mage
