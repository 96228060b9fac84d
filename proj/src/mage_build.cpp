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

#include "mage/mage_build.hpp"

#include <string>

#include "mage/error.hpp"
#include "mage/hash_engine.hpp"
#include "mage/parallel.hpp"
#include "omp_util.hpp"

namespace mage {

Loader launch_loader(Variant v) {
  return v == Variant::kSplit ? Loader::kUnmodified : Loader::kModified;
}

Mainfo derive_mainfo(const EnclaveImage& img) {
  if (!img.has_mars()) {
    throw Error(ErrorKind::kMissingMars, "cannot derive MAINFO without a MARS section");
  }
  const auto pre = non_mars_pages(img);
  return Mainfo::from_state(premeasure_enclave(img.params, pre), img.mars_offset());
}

SplitMainfo derive_split_mainfo(const EnclaveImage& img) {
  if (!img.has_mars()) {
    throw Error(ErrorKind::kMissingMars, "cannot derive MAINFO without a MARS section");
  }
  validate_pages(img.params, img.pages);
  const auto before = pages_before_mars(img);
  const auto after = pages_after_mars(img);
  SplitMainfo m;
  m.pre = Mainfo::from_state(premeasure_enclave(img.params, before), img.mars_offset());
  m.post_digest = sha256(serialize_page_records(after));
  m.post_pages = after.size();
  return m;
}

Bytes build_mars(std::span<const Mainfo> mainfos, std::size_t section_pages) {
  return encode_section(mainfos, section_pages);
}

Measurement measure_with_loader(const EnclaveImage& img, Loader loader) {
  const auto order = load_order(img, loader);
  return measure_enclave(img.params, order);
}

Measurement final_measurement(const EnclaveImage& img) {
  return measure_with_loader(img, launch_loader(img.variant));
}

EnclaveImage fill_mars(EnclaveImage img, ByteView section) {
  if (!img.has_mars()) throw Error(ErrorKind::kMissingMars, "image has no MARS section");
  validate_section(section, img.variant);
  img.set_mars_bytes(section);
  return img;
}

InstrumentedGroup instrument_group(std::vector<EnclaveImage> images) {
  if (images.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "group has no members");
  }
  const Variant variant = images.front().variant;
  std::uint64_t section_bytes = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (!img.has_mars()) {
      throw Error(ErrorKind::kMissingMars,
                  "group member " + std::to_string(i) + " has no MARS section");
    }
    if (img.variant != variant) {
      throw Error(ErrorKind::kInvalidArgument,
                  "group mixes " + std::string(to_string(variant)) + " and " +
                      std::string(to_string(img.variant)) + " members");
    }
    if (i == 0) {
      section_bytes = img.mars_bytes_size();
    } else if (img.mars_bytes_size() != section_bytes) {
      throw Error(ErrorKind::kSizeMismatch,
                  "group member " + std::to_string(i) + " reserves " +
                      std::to_string(img.mars_bytes_size()) +
                      " MARS bytes, member 0 reserves " + std::to_string(section_bytes));
    }
  }
  const std::size_t section_pages = section_bytes / kPageSize;

  InstrumentedGroup out;
  Bytes section;
  switch (variant) {
    case Variant::kBasic: {
      const auto mainfos = derive_mainfos(images);
      section = build_mars(mainfos, section_pages);
      break;
    }
    case Variant::kSplit: {
      const auto records = derive_split_mainfos(images);
      section = encode_section<SplitMainfo>(records, section_pages);
      break;
    }
    case Variant::kMerkle: {
      if (section_pages != 1) {
        throw Error(ErrorKind::kInvalidArgument,
                    "merkle groups store only the root and need a one-page MARS");
      }
      out.tree = MerkleTree::build(derive_mainfos(images));
      section = out.tree->root_section().serialize();
      break;
    }
  }

  for (auto& img : images) img.set_mars_bytes(section);
  out.measurements = final_measurements(images);
  out.images = std::move(images);
  return out;
}

std::vector<Mainfo> derive_mainfos(std::span<const EnclaveImage> images) {
  std::vector<Mainfo> out(images.size());
  detail::parallel_for(static_cast<std::int64_t>(images.size()),
                       [&](std::int64_t i) { out[i] = derive_mainfo(images[i]); });
  return out;
}

std::vector<Mainfo> derive_mainfos_serial(std::span<const EnclaveImage> images) {
  std::vector<Mainfo> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(derive_mainfo(img));
  return out;
}

std::vector<SplitMainfo> derive_split_mainfos(std::span<const EnclaveImage> images) {
  std::vector<SplitMainfo> out(images.size());
  detail::parallel_for(static_cast<std::int64_t>(images.size()), [&](std::int64_t i) {
    out[i] = derive_split_mainfo(images[i]);
  });
  return out;
}

std::vector<SplitMainfo> derive_split_mainfos_serial(std::span<const EnclaveImage> images) {
  std::vector<SplitMainfo> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(derive_split_mainfo(img));
  return out;
}

std::vector<Measurement> final_measurements(std::span<const EnclaveImage> images) {
  std::vector<Measurement> out(images.size());
  detail::parallel_for(static_cast<std::int64_t>(images.size()), [&](std::int64_t i) {
    out[i] = final_measurement(images[i]);
  });
  return out;
}

std::vector<Measurement> final_measurements_serial(std::span<const EnclaveImage> images) {
  std::vector<Measurement> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(final_measurement(img));
  return out;
}

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace mage
