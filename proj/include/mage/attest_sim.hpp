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

#include <array>
#include <cstdint>

#include "mage/bytes.hpp"
#include "mage/crypto.hpp"

namespace mage {

inline constexpr std::size_t kReportDataSize = 64;
inline constexpr std::size_t kReportSize = 32 + kReportDataSize + 32;

using ReportData = std::array<std::uint8_t, kReportDataSize>;
using PlatformId = std::array<std::uint8_t, 16>;

// Wire form: attester_measurement || report_data || mac, no framing.
struct Report {
  Measurement attester_measurement{};
  ReportData report_data{};
  Digest mac{};

  std::array<std::uint8_t, kReportSize> serialize() const;
  static Report parse(ByteView bytes);

  bool operator==(const Report&) const = default;
};

// Key bytes never leave the platform; only equality is observable.
class ReportKey {
 public:
  bool operator==(const ReportKey& other) const;

 private:
  friend class Platform;
  explicit ReportKey(const Digest& k) : key_(k) {}
  Digest key_;
};

// A simulated SGX machine: a fused root secret plus the EGETKEY/EREPORT
// primitives keyed from it. MACs are HMAC-SHA256.
class Platform {
 public:
  static constexpr std::string_view kMacName = "HMAC-SHA256";

  static Platform create(RandomSource& rng);

  const PlatformId& id() const { return id_; }

  // HMAC(root_secret, "REPORTKEY" || measurement)
  ReportKey report_key(const Measurement& enclave) const;

  // Report from `attester`, MACed for `target`. report_data must be 64 bytes.
  Report ereport(const Measurement& attester, const Measurement& target,
                 ByteView report_data) const;

  // Run inside the enclave whose measurement is `own`.
  bool verify_report(const Measurement& own, const Report& report) const;

 private:
  Platform() = default;
  Digest mac_for(const ReportKey& key, const Report& report) const;

  PlatformId id_{};
  std::array<std::uint8_t, 32> root_secret_{};
};

inline ReportKey report_key(const Platform& p, const Measurement& m) {
  return p.report_key(m);
}
inline Report ereport(const Platform& p, const Measurement& attester,
                      const Measurement& target, ByteView report_data) {
  return p.ereport(attester, target, report_data);
}
inline bool verify_report(const Platform& p, const Measurement& own,
                          const Report& report) {
  return p.verify_report(own, report);
}

}  // namespace mage
