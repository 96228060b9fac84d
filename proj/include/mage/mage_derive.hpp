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
#include <span>

#include "mage/bytes.hpp"
#include "mage/enclave_image.hpp"
#include "mage/hash_engine.hpp"
#include "mage/mars_section.hpp"
#include "mage/merkle.hpp"

namespace mage {

enum class ViewSource { kInEnclave, kExternal };

// What a running enclave can see of its own MARS.
struct MageView {
  Bytes mars_bytes;
  std::uint64_t mars_offset = 0;
  Variant variant = Variant::kBasic;
  ViewSource source = ViewSource::kInEnclave;

  static MageView of(const EnclaveImage& img);
};

// Number of entries in the section (leaf count for the merkle variant).
// Throws kMalformedSection.
std::uint64_t mage_size(const MageView& view);

// Resumes from an entry and absorbs the MARS pages at its offset. The
// returned state is one finalization away from the measurement.
HashState resume_with_mars(const Mainfo& entry, ByteView mars_bytes);

// Runtime derivation of group member idx (0-based) from the view's own
// MARS. Throws kIndexOutOfRange if idx >= mage_size(view). Split views only
// work for entries with no post-MARS pages; merkle views need merkle_derive.
Measurement derive_measurement(const MageView& view, std::uint64_t idx);

// Split variant: post_content is the serialized page records after the
// MARS, fetched from the host. Throws kIntegrity when it does not match the
// stored digest.
Measurement derive_measurement_split(const MageView& view, std::uint64_t idx,
                                     ByteView post_content);

// Merkle variant: the entry and its path come from untrusted storage.
// Throws kProofInvalid on a bad path, kIndexOutOfRange on a bad index.
Measurement merkle_derive(const MageView& root_view, std::uint64_t idx,
                          const Mainfo& entry, std::span<const Digest> proof);

}  // namespace mage
