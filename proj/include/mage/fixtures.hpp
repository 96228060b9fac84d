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
#include <optional>

#include "mage/crypto.hpp"
#include "mage/enclave_image.hpp"

namespace mage {

struct ImageSpec {
  std::size_t content_pages = 2;
  std::size_t mars_pages = 1;  // 0 for an image without a MARS
  // Position of the MARS in the page table; nullopt puts it in the middle.
  std::optional<std::size_t> mars_position;
  Variant variant = Variant::kBasic;
  std::uint32_t ssa_frame_pages = 1;
};

// Random page contents and permissions, pages laid out at increasing
// offsets in page-table order, an all-zero MARS placeholder.
EnclaveImage make_random_image(const ImageSpec& spec, RandomSource& rng);

// A one-member basic group over `mars_pages` pages whose section lists
// `entries` records, entry 0 being the member itself. Used for timing.
EnclaveImage make_timing_image(std::size_t mars_pages, std::size_t entries,
                               RandomSource& rng);

struct DerivationTiming {
  std::size_t mars_pages = 0;
  std::size_t entries = 0;
  std::size_t iterations = 0;
  double mean_ns = 0;
};

// Mean wall time of derive_measurement(view, 0) over `iterations` runs
// (auto-sized when 0).
DerivationTiming time_derivation(std::size_t mars_pages, std::size_t entries,
                                 std::size_t iterations = 0);

}  // namespace mage
