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

#include "mage/mage_derive.hpp"

#include <string>

#include "mage/error.hpp"
#include "mage/parallel.hpp"
#include "mage/sgx_measure.hpp"
#include "omp_util.hpp"

namespace mage {
namespace {

void check_index(std::uint64_t idx, std::uint64_t size) {
  if (idx >= size) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "index " + std::to_string(idx) + " >= " + std::to_string(size) +
                    " entries");
  }
}

void check_view(const MageView& view) {
  if (view.mars_bytes.empty() || view.mars_bytes.size() % kPageSize != 0) {
    throw Error(ErrorKind::kMalformedSection,
                "MARS view of " + std::to_string(view.mars_bytes.size()) +
                    " bytes is not page granular");
  }
}

}  // namespace

MageView MageView::of(const EnclaveImage& img) {
  return MageView{img.mars_bytes(), img.mars_offset(), img.variant,
                  ViewSource::kInEnclave};
}

std::uint64_t mage_size(const MageView& view) {
  check_view(view);
  return section_entry_count(view.mars_bytes, view.variant);
}

HashState resume_with_mars(const Mainfo& entry, ByteView mars_bytes) {
  HashState state = entry.state();
  const SecInfo secinfo = SecInfo::read_only();
  for (std::size_t p = 0; p * kPageSize < mars_bytes.size(); ++p) {
    absorb_page(state, entry.offset + p * kPageSize, secinfo,
                mars_bytes.subspan(p * kPageSize, kPageSize));
  }
  return state;
}

Measurement derive_measurement(const MageView& view, std::uint64_t idx) {
  check_view(view);
  switch (view.variant) {
    case Variant::kBasic: {
      const std::uint64_t n = section_entry_count(view.mars_bytes, view.variant);
      check_index(idx, n);
      const Mainfo entry =
          Mainfo::parse(ByteView(view.mars_bytes).subspan(8 + idx * Mainfo::kSize,
                                                          Mainfo::kSize));
      return resume_with_mars(entry, view.mars_bytes).finalize();
    }
    case Variant::kSplit:
      return derive_measurement_split(view, idx, {});
    case Variant::kMerkle:
      throw Error(ErrorKind::kInvalidArgument,
                  "merkle views need the entry and proof from the sidecar");
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown variant");
}

Measurement derive_measurement_split(const MageView& view, std::uint64_t idx,
                                     ByteView post_content) {
  check_view(view);
  if (view.variant != Variant::kSplit) {
    throw Error(ErrorKind::kInvalidArgument, "not a split-variant view");
  }
  const auto records = decode_section<SplitMainfo>(view.mars_bytes);
  check_index(idx, records.size());
  const SplitMainfo& entry = records[idx];

  if (sha256(post_content) != entry.post_digest) {
    throw Error(ErrorKind::kIntegrity,
                "host-supplied post-MARS content does not match its digest");
  }
  const auto post_pages = parse_page_records(post_content);
  if (post_pages.size() != entry.post_pages) {
    throw Error(ErrorKind::kIntegrity, "post-MARS page count mismatch");
  }

  HashState state = resume_with_mars(entry.pre, view.mars_bytes);
  for (const auto& p : post_pages) absorb_page(state, p.offset, p.secinfo, p.content);
  return std::move(state).finalize();
}

Measurement merkle_derive(const MageView& root_view, std::uint64_t idx,
                          const Mainfo& entry, std::span<const Digest> proof) {
  check_view(root_view);
  if (root_view.variant != Variant::kMerkle) {
    throw Error(ErrorKind::kInvalidArgument, "not a merkle-variant view");
  }
  const auto root = MerkleRootSection::parse(root_view.mars_bytes);
  check_index(idx, root.leaf_count);
  if (merkle_root_from_proof(root.leaf_count, idx, entry, proof) != root.root) {
    throw Error(ErrorKind::kProofInvalid,
                "entry " + std::to_string(idx) + " is not included under the root");
  }
  return resume_with_mars(entry, root_view.mars_bytes).finalize();
}

std::vector<Measurement> derive_all(const MageView& view) {
  const std::uint64_t n = mage_size(view);
  std::vector<Measurement> out(n);
  detail::parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t i) {
    out[i] = derive_measurement(view, static_cast<std::uint64_t>(i));
  });
  return out;
}

std::vector<Measurement> derive_all_serial(const MageView& view) {
  const std::uint64_t n = mage_size(view);
  std::vector<Measurement> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(derive_measurement(view, i));
  return out;
}

}  // namespace mage
