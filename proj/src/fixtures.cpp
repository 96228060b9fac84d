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

#include "mage/fixtures.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <vector>

#include "mage/error.hpp"
#include "mage/mage_build.hpp"
#include "mage/mage_derive.hpp"

namespace mage {
namespace {

SecInfo random_secinfo(RandomSource& rng) {
  std::uint8_t pick[1];
  rng.fill(pick);
  if (pick[0] % 8 == 0) return SecInfo::tcs();
  return SecInfo::reg(perm::kRead | (pick[0] & 0x6));
}

}  // namespace

EnclaveImage make_random_image(const ImageSpec& spec, RandomSource& rng) {
  const std::size_t total = spec.content_pages + spec.mars_pages;
  const std::size_t mars_at =
      std::min(spec.mars_position.value_or(spec.content_pages / 2), spec.content_pages);

  EnclaveImage img;
  img.variant = spec.variant;
  img.params.ssa_frame_pages = spec.ssa_frame_pages;
  img.params.enclave_size = std::bit_ceil(std::max<std::uint64_t>(total, 1) * kPageSize);
  img.pages.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    MeasuredPage p;
    p.offset = i * kPageSize;
    const bool in_mars = spec.mars_pages > 0 && i >= mars_at && i < mars_at + spec.mars_pages;
    if (in_mars) {
      p.secinfo = SecInfo::read_only();
    } else {
      p.secinfo = random_secinfo(rng);
      rng.fill(p.content);
    }
    img.pages.push_back(p);
  }
  if (spec.mars_pages > 0) img.mars = MarsRange{mars_at, spec.mars_pages};
  return img;
}

EnclaveImage make_timing_image(std::size_t mars_pages, std::size_t entries,
                               RandomSource& rng) {
  if (entries == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one entry");
  ImageSpec spec;
  spec.content_pages = 1;
  spec.mars_pages = mars_pages;
  spec.mars_position = 1;
  EnclaveImage img = make_random_image(spec, rng);

  std::vector<Mainfo> mainfos(entries);
  mainfos[0] = derive_mainfo(img);
  for (std::size_t i = 1; i < entries; ++i) {
    rng.fill(mainfos[i].premr);
    mainfos[i].count = premeasure_byte_count(1 + i % 7);
    mainfos[i].offset = kPageSize * (1 + i % 5);
  }
  img.set_mars_bytes(build_mars(mainfos, mars_pages));
  return img;
}

DerivationTiming time_derivation(std::size_t mars_pages, std::size_t entries,
                                 std::size_t iterations) {
  DeterministicRandom rng(mars_pages * 7919 + entries);
  const MageView view = MageView::of(make_timing_image(mars_pages, entries, rng));
  if (iterations == 0) iterations = std::max<std::size_t>(5, 4000 / mars_pages);

  volatile std::uint8_t sink = 0;
  derive_measurement(view, 0);  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < iterations; ++i) sink = sink ^ derive_measurement(view, 0)[0];
  const auto elapsed = std::chrono::steady_clock::now() - start;
  (void)sink;

  DerivationTiming t;
  t.mars_pages = mars_pages;
  t.entries = entries;
  t.iterations = iterations;
  t.mean_ns = std::chrono::duration<double, std::nano>(elapsed).count() /
              static_cast<double>(iterations);
  return t;
}

}  // namespace mage
