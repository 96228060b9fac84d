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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mage/error.hpp"
#include "mage/fixtures.hpp"
#include "mage/mage_build.hpp"
#include "mage/mage_derive.hpp"
#include "mage/merkle.hpp"
#include "mage/migration.hpp"
#include "oracle.hpp"

using namespace mage;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kCriterion1BudgetS = 10.0;
constexpr double kCriterion6BudgetS = 5.0;
constexpr double kMinRSquared = 0.99;
constexpr double kMaxEntryRatio = 1.2;

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<EnclaveImage> random_members(std::size_t n, RandomSource& rng, std::size_t mars_pages,
                                         Variant v = Variant::kBasic) {
  std::vector<EnclaveImage> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t r = 0;
    rng.fill({&r, 1});
    ImageSpec spec;
    spec.content_pages = 1 + r % 8;
    spec.mars_pages = mars_pages;
    spec.variant = v;
    out.push_back(make_random_image(spec, rng));
  }
  return out;
}

Verdict mutual_derivation() {
  Verdict v;
  DeterministicRandom rng(101);
  const auto t0 = Clock::now();
  std::size_t checked = 0;
  for (std::size_t n : {1u, 2u, 3u, 10u, 85u}) {
    const auto group = instrument_group(random_members(n, rng, 1));
    std::vector<Digest> direct;
    for (const auto& img : group.images) direct.push_back(oracle::measure_modified(img));
    for (std::size_t i = 0; i < n; ++i) {
      const MageView view = MageView::of(group.images[i]);
      for (std::size_t j = 0; j < n; ++j, ++checked) {
        v.require(derive_measurement(view, j) == direct[j],
                  "N=" + std::to_string(n) + " F(A_" + std::to_string(i) + "," +
                      std::to_string(j) + ") differs");
      }
    }
  }
  const double s = seconds_since(t0);
  v.require(s < kCriterion1BudgetS, "took " + std::to_string(s) + " s");
  if (v.pass) v.detail = std::to_string(checked) + " pairs, " + std::to_string(s) + " s";
  return v;
}

Verdict capacity() {
  Verdict v;
  v.require(mars_capacity(kPageSize) == 85, "one page holds " + std::to_string(mars_capacity(kPageSize)));
  v.require(mars_pages_needed(10000) == 118, "10000 entries need " + std::to_string(mars_pages_needed(10000)));
  v.require(mars_pages_needed(10000) * kPageSize == 472 * 1024, "10000 entries not 472 KB");
  // The formula agrees with what the encoder actually accepts.
  std::vector<Mainfo> entries(86);
  v.require(build_mars(std::span(entries).first(85), 1).size() == kPageSize, "85 entries rejected");
  bool rejected = false;
  try {
    build_mars(entries, 1);
  } catch (const Error& e) {
    rejected = e.kind() == ErrorKind::kCapacityExceeded;
  }
  v.require(rejected, "86 entries accepted in one page");
  std::vector<Mainfo> big(10000);
  bool too_small = false;
  try {
    build_mars(big, 117);
  } catch (const Error&) {
    too_small = true;
  }
  v.require(too_small && build_mars(big, 118).size() == 118 * kPageSize, "118-page boundary");
  for (std::uint64_t L = kPageSize; L <= 16 * kPageSize; L += kPageSize) {
    v.require(mars_capacity(L) == (L - 8) / 48, "capacity formula at L=" + std::to_string(L));
  }
  if (v.pass) v.detail = "85 per page, 10000 -> 118 pages (472 KB)";
  return v;
}

Verdict loader_order() {
  Verdict v;
  DeterministicRandom rng(303);
  std::size_t cases = 0;
  for (std::size_t content = 1; content <= 6; ++content) {
    for (std::size_t mars_pages = 1; mars_pages <= 3; ++mars_pages) {
      for (std::size_t at = 0; at <= content; ++at, ++cases) {
        ImageSpec spec;
        spec.content_pages = content;
        spec.mars_pages = mars_pages;
        spec.mars_position = at;
        const EnclaveImage img = make_random_image(spec, rng);
        const auto mod = measure_with_loader(img, Loader::kModified);
        const auto unmod = measure_with_loader(img, Loader::kUnmodified);
        v.require(mod == oracle::measure_modified(img) && unmod == oracle::measure_unmodified(img),
                  "loader measurement disagrees with oracle");
        if (at < content) {
          v.require(mod != unmod, "MARS at " + std::to_string(at) + " of " +
                                      std::to_string(content) + ": loaders agree");
        } else {
          v.require(mod == unmod, "MARS already last: loaders differ");
        }
      }
    }
    ImageSpec plain;
    plain.content_pages = content;
    plain.mars_pages = 0;
    const EnclaveImage img = make_random_image(plain, rng);
    v.require(measure_with_loader(img, Loader::kModified) ==
                  measure_with_loader(img, Loader::kUnmodified),
              "no-MARS image: loaders differ");
    ++cases;
  }
  if (v.pass) v.detail = std::to_string(cases) + " images";
  return v;
}

Verdict split_variant() {
  Verdict v;
  std::size_t corruptions = 0;
  for (std::size_t at = 0; at <= 6; ++at) {
    DeterministicRandom rng(400 + at);
    ImageSpec spec;
    spec.content_pages = 6;
    spec.mars_position = at;
    spec.variant = Variant::kSplit;
    const auto group = instrument_group({make_random_image(spec, rng)});
    const EnclaveImage& img = group.images[0];
    const MageView view = MageView::of(img);
    const Bytes post = serialize_page_records(pages_after_mars(img));
    const std::string where = "split at " + std::to_string(at);
    v.require(derive_measurement_split(view, 0, post) == oracle::measure_unmodified(img),
              where + ": honest C_post mismatch");
    Bytes bad = post;
    for (std::size_t i = 0; i < post.size(); ++i, ++corruptions) {
      bad[i] ^= 0xff;
      bool rejected = false;
      try {
        derive_measurement_split(view, 0, bad);
      } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::kIntegrity;
      }
      bad[i] ^= 0xff;
      if (!rejected) {
        v.require(false, where + ": corruption at byte " + std::to_string(i) + " accepted");
        break;
      }
    }
  }
  if (v.pass) v.detail = "7 split points, " + std::to_string(corruptions) + " corruptions rejected";
  return v;
}

Verdict merkle_variant() {
  Verdict v;
  DeterministicRandom rng(505);
  std::size_t flips = 0;
  for (std::size_t n = 1; n <= 16; ++n) {
    const auto group = instrument_group(random_members(n, rng, 1, Variant::kMerkle));
    const MerkleTree& tree = *group.tree;
    const auto root = tree.root_section();
    const std::size_t want = n == 1 ? 0 : static_cast<std::size_t>(std::ceil(std::log2(double(n))));
    const MageView view = MageView::of(group.images[0]);
    for (std::size_t j = 0; j < n; ++j) {
      auto proof = tree.proof(j);
      const Mainfo& entry = tree.entries()[j];
      const std::string where = "n=" + std::to_string(n) + " leaf " + std::to_string(j);
      v.require(proof.size() == want, where + ": proof length");
      v.require(merkle_verify(root, j, entry, proof), where + ": proof rejected");
      v.require(merkle_derive(view, j, entry, proof) == oracle::measure_modified(group.images[j]),
                where + ": derived measurement");
      for (auto& node : proof) {
        for (std::size_t bit = 0; bit < 256; ++bit, ++flips) {
          node[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
          v.require(!merkle_verify(root, j, entry, proof), where + ": flipped proof accepted");
          node[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        }
      }
    }
  }
  if (v.pass) v.detail = "1..16 leaves, " + std::to_string(flips) + " bit flips rejected";
  return v;
}

struct Expected {
  const char* adversary;
  PartyOutcome initiator;
  PartyOutcome responder;
  AckStatus ack;
  AbortReason ack_failure;
};

Verdict protocol() {
  using S = PartyState;
  using R = AbortReason;
  Verdict v;
  const auto t0 = Clock::now();
  DeterministicRandom rng(606);
  auto platform = std::make_shared<const Platform>(Platform::create(rng));
  auto kex = std::make_shared<const X25519KeyExchange>();
  const auto group = instrument_group(random_members(2, rng, 1));
  auto img_a = std::make_shared<const EnclaveImage>(group.images[0]);
  auto img_b = std::make_shared<const EnclaveImage>(group.images[1]);
  const Bytes secret = rng.bytes(1024);

  const PartyOutcome done{S::kDone, R::kNone}, idle{S::kIdle, R::kNone};
  auto aborted = [](R r) { return PartyOutcome{S::kAborted, r}; };
  const std::vector<Expected> table = {
      {"honest", done, done, AckStatus::kConfirmed, R::kNone},
      {"drop:1", aborted(R::kTimeout), idle, AckStatus::kNotApplicable, R::kNone},
      {"drop:2", aborted(R::kTimeout), aborted(R::kTimeout), AckStatus::kNotApplicable, R::kNone},
      {"drop:3", done, aborted(R::kTimeout), AckStatus::kFailed, R::kTimeout},
      {"drop:4", done, done, AckStatus::kFailed, R::kTimeout},
      {"replay:1", aborted(R::kTimeout), aborted(R::kReplay), AckStatus::kNotApplicable, R::kNone},
      {"replay:2", aborted(R::kReplay), aborted(R::kTimeout), AckStatus::kNotApplicable, R::kNone},
      {"replay:3", done, aborted(R::kReplay), AckStatus::kFailed, R::kTimeout},
      {"replay:4", done, done, AckStatus::kFailed, R::kReplay},
      {"tamper:1", aborted(R::kTimeout), aborted(R::kIntegrity), AckStatus::kNotApplicable, R::kNone},
      {"tamper:2", aborted(R::kIntegrity), aborted(R::kTimeout), AckStatus::kNotApplicable, R::kNone},
      {"tamper:3", done, aborted(R::kIntegrity), AckStatus::kFailed, R::kTimeout},
      {"tamper:4", done, done, AckStatus::kFailed, R::kIntegrity},
  };
  std::uint64_t seed = 1;
  for (const auto& e : table) {
    EnclaveRuntime a(img_a, 0, platform, kex, std::make_unique<DeterministicRandom>(seed++));
    EnclaveRuntime b(img_b, 1, platform, kex, std::make_unique<DeterministicRandom>(seed++));
    Channel channel(Adversary::parse(e.adversary));
    const SessionResult r = run_session(a, b, channel, secret);
    const std::string got = r.initiator.to_string() + "/" + r.responder.to_string() + " ack " +
                            std::string(to_string(r.ack)) + "(" +
                            std::string(to_string(r.ack_failure)) + ")";
    v.require(r.initiator == e.initiator && r.responder == e.responder && r.ack == e.ack &&
                  r.ack_failure == e.ack_failure,
              std::string(e.adversary) + " gave " + got);
    if (r.delivered_secret) {
      v.require(*r.delivered_secret == secret, std::string(e.adversary) + ": wrong secret delivered");
    }
    const bool clean = r.initiator == done && r.responder == done && r.ack == AckStatus::kConfirmed;
    if (std::string(e.adversary) == "honest") {
      v.require(clean && r.delivered_secret && r.delivered_secret->size() == 1024,
                "honest session did not migrate 1 KB");
    } else {
      v.require(!clean, std::string(e.adversary) + " went unnoticed");
    }
  }
  const double s = seconds_since(t0);
  v.require(s < kCriterion6BudgetS, "took " + std::to_string(s) + " s");
  if (v.pass) v.detail = "honest + 12 adversaries, " + std::to_string(s) + " s";
  return v;
}

// Median ns per derive_measurement(view, 0) over `reps` timed batches.
double median_derivation_ns(const MageView& view, std::size_t batch, std::size_t reps) {
  std::vector<double> samples;
  volatile std::uint8_t sink = 0;
  derive_measurement(view, 0);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < batch; ++i) sink = sink ^ derive_measurement(view, 0)[0];
    samples.push_back(std::chrono::duration<double, std::nano>(Clock::now() - t0).count() /
                      static_cast<double>(batch));
  }
  (void)sink;
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

Verdict performance_shape() {
  Verdict v;
  const std::vector<std::size_t> pages = {1, 10, 100, 1000};
  std::vector<double> xs, ys;
  for (std::size_t p : pages) {
    DeterministicRandom rng(700 + p);
    const MageView view = MageView::of(make_timing_image(p, 1, rng));
    xs.push_back(static_cast<double>(p));
    ys.push_back(median_derivation_ns(view, std::max<std::size_t>(1, 400 / p), 7));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = (sxy * sxy) / (sxx * syy);
  v.require(r2 >= kMinRSquared, "R^2 = " + std::to_string(r2));

  // Same page count, 1 vs 85 entries, measured interleaved.
  DeterministicRandom rng(800);
  const MageView one = MageView::of(make_timing_image(16, 1, rng));
  const MageView full = MageView::of(make_timing_image(16, 85, rng));
  std::vector<double> a, b;
  for (int r = 0; r < 9; ++r) {
    a.push_back(median_derivation_ns(one, 20, 3));
    b.push_back(median_derivation_ns(full, 20, 3));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double ratio = std::max(a[4], b[4]) / std::min(a[4], b[4]);
  v.require(ratio <= kMaxEntryRatio, "entry-count ratio " + std::to_string(ratio));

  char buf[160];
  std::snprintf(buf, sizeof buf, "R^2=%.5f slope=%.0f ns/page 1-page=%.1f us entry ratio=%.3f",
                r2, slope, ys[0] / 1000.0, ratio);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict oracle_suite() {
  Verdict v;
  DeterministicRandom rng(808);
  for (int i = 0; i < 200; ++i) {
    std::uint8_t r[2] = {};
    rng.fill(r);
    ImageSpec spec;
    spec.content_pages = 1 + r[0] % 8;
    spec.mars_pages = r[1] % 2;
    const EnclaveImage img = make_random_image(spec, rng);
    const auto order = load_order(img, Loader::kModified);
    v.require(measure_enclave(img.params, order) == oracle::measure(img.params, order),
              "enclave " + std::to_string(i) + " differs");
    v.require(final_measurement(img) == oracle::measure_modified(img),
              "enclave " + std::to_string(i) + " final measurement differs");
  }
  if (v.pass) v.detail = "200 enclaves bit-exact";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"mutual derivation correctness", mutual_derivation},
      {"capacity formulas", capacity},
      {"loader-order sensitivity", loader_order},
      {"split variant", split_variant},
      {"merkle variant", merkle_variant},
      {"protocol soundness", protocol},
      {"performance shape", performance_shape},
      {"oracle suite", oracle_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
