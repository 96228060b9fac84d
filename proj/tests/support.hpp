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

#include <memory>
#include <vector>

#include "mage/fixtures.hpp"
#include "mage/mage_build.hpp"
#include "mage/migration.hpp"

namespace testing_support {

// n images with 1..max_pages random content pages and a one-page MARS.
inline std::vector<mage::EnclaveImage> random_group(std::size_t n, mage::RandomSource& rng,
                                                    std::size_t max_pages = 8,
                                                    mage::Variant v = mage::Variant::kBasic,
                                                    std::size_t mars_pages = 1) {
  std::vector<mage::EnclaveImage> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t r = 0;
    rng.fill({&r, 1});
    mage::ImageSpec spec;
    spec.content_pages = 1 + r % max_pages;
    spec.mars_pages = mars_pages;
    spec.variant = v;
    out.push_back(mage::make_random_image(spec, rng));
  }
  return out;
}

// Two runtimes on one platform over an instrumented group.
struct SessionFixture {
  std::shared_ptr<const mage::Platform> platform;
  std::shared_ptr<const mage::KeyExchange> kex;
  std::vector<std::shared_ptr<const mage::EnclaveImage>> images;

  explicit SessionFixture(std::uint64_t seed, std::size_t members = 2,
                          std::shared_ptr<const mage::KeyExchange> k =
                              std::make_shared<mage::SmallGroupKeyExchange>()) {
    mage::DeterministicRandom rng(seed);
    platform = std::make_shared<const mage::Platform>(mage::Platform::create(rng));
    kex = std::move(k);
    auto group = mage::instrument_group(random_group(members, rng, 3));
    for (auto& img : group.images) {
      images.push_back(std::make_shared<const mage::EnclaveImage>(std::move(img)));
    }
  }

  mage::EnclaveRuntime runtime(std::size_t member, std::uint64_t seed) const {
    return runtime_for(images.at(member), member, seed);
  }

  mage::EnclaveRuntime runtime_for(std::shared_ptr<const mage::EnclaveImage> img,
                                   std::uint64_t claimed_index, std::uint64_t seed) const {
    return mage::EnclaveRuntime(std::move(img), claimed_index, platform, kex,
                                std::make_unique<mage::DeterministicRandom>(seed));
  }
};

}  // namespace testing_support
