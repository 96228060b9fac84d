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

#include <optional>
#include <span>
#include <vector>

#include "mage/enclave_image.hpp"
#include "mage/mars_section.hpp"
#include "mage/merkle.hpp"

namespace mage {

// Loader the variant is designed for: split groups run under the stock
// loader, the others under the two-stage loader that adds the MARS last.
Loader launch_loader(Variant v);

// Premeasurement over every page the two-stage loader adds before the MARS.
// Throws kMissingMars.
Mainfo derive_mainfo(const EnclaveImage& img);

// Split record: state over the pages before the MARS in file order, digest
// of the page records after it.
SplitMainfo derive_split_mainfo(const EnclaveImage& img);

// Serialized basic section holding the entries in the given order.
// Throws kCapacityExceeded.
Bytes build_mars(std::span<const Mainfo> mainfos, std::size_t section_pages);

// Measurement under launch_loader(img.variant).
Measurement final_measurement(const EnclaveImage& img);
Measurement measure_with_loader(const EnclaveImage& img, Loader loader);

struct InstrumentedGroup {
  std::vector<EnclaveImage> images;          // input order
  std::vector<Measurement> measurements;     // final_measurement of each
  std::optional<MerkleTree> tree;            // merkle variant only
};

// Derives every member's record, builds the shared MARS and writes it into
// every member. All members must share a variant and a MARS size; merkle
// groups need a one-page MARS. Throws kMissingMars, kSizeMismatch,
// kCapacityExceeded, kInvalidArgument.
InstrumentedGroup instrument_group(std::vector<EnclaveImage> images);

// Writes an already assembled section into one image (the per-developer
// fill step). The section must match the image's MARS size.
EnclaveImage fill_mars(EnclaveImage img, ByteView section);

}  // namespace mage
