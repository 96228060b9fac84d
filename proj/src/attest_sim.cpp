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

#include "mage/attest_sim.hpp"

#include <cstring>
#include <string>

#include "mage/error.hpp"

namespace mage {

std::array<std::uint8_t, kReportSize> Report::serialize() const {
  std::array<std::uint8_t, kReportSize> out{};
  std::memcpy(out.data(), attester_measurement.data(), 32);
  std::memcpy(out.data() + 32, report_data.data(), kReportDataSize);
  std::memcpy(out.data() + 96, mac.data(), 32);
  return out;
}

Report Report::parse(ByteView bytes) {
  if (bytes.size() != kReportSize) {
    throw Error(ErrorKind::kInvalidArgument, "report must be 128 bytes");
  }
  Report r;
  std::memcpy(r.attester_measurement.data(), bytes.data(), 32);
  std::memcpy(r.report_data.data(), bytes.data() + 32, kReportDataSize);
  std::memcpy(r.mac.data(), bytes.data() + 96, 32);
  return r;
}

bool ReportKey::operator==(const ReportKey& other) const {
  return constant_time_equal(key_, other.key_);
}

Platform Platform::create(RandomSource& rng) {
  Platform p;
  rng.fill(p.id_);
  rng.fill(p.root_secret_);
  return p;
}

ReportKey Platform::report_key(const Measurement& enclave) const {
  static constexpr char kLabel[] = "REPORTKEY";
  Bytes msg(kLabel, kLabel + sizeof(kLabel) - 1);
  append(msg, enclave);
  return ReportKey(hmac_sha256(root_secret_, msg));
}

Digest Platform::mac_for(const ReportKey& key, const Report& report) const {
  Bytes body(report.attester_measurement.begin(), report.attester_measurement.end());
  append(body, report.report_data);
  return hmac_sha256(key.key_, body);
}

Report Platform::ereport(const Measurement& attester, const Measurement& target,
                         ByteView report_data) const {
  if (report_data.size() != kReportDataSize) {
    throw Error(ErrorKind::kInvalidArgument,
                "report data must be 64 bytes, got " +
                    std::to_string(report_data.size()));
  }
  Report r;
  r.attester_measurement = attester;
  std::memcpy(r.report_data.data(), report_data.data(), kReportDataSize);
  r.mac = mac_for(report_key(target), r);
  return r;
}

bool Platform::verify_report(const Measurement& own, const Report& report) const {
  const Digest expected = mac_for(report_key(own), report);
  return constant_time_equal(expected, report.mac);
}

}  // namespace mage
