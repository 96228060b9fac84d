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

#include <cctype>

#include "mage/bytes.hpp"
#include "mage/error.hpp"

namespace mage {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kMisaligned: return "misaligned";
    case ErrorKind::kOutOfRange: return "out of range";
    case ErrorKind::kOverlap: return "overlapping pages";
    case ErrorKind::kBadMagic: return "bad magic";
    case ErrorKind::kBadVersion: return "bad version";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kMarsOutOfBounds: return "MARS range out of bounds";
    case ErrorKind::kMalformedSection: return "malformed MARS section";
    case ErrorKind::kMissingMars: return "missing MARS section";
    case ErrorKind::kSizeMismatch: return "MARS size mismatch";
    case ErrorKind::kCapacityExceeded: return "capacity exceeded";
    case ErrorKind::kIndexOutOfRange: return "index out of range";
    case ErrorKind::kIntegrity: return "integrity violation";
    case ErrorKind::kProofInvalid: return "invalid inclusion proof";
    case ErrorKind::kCrypto: return "crypto failure";
    case ErrorKind::kIo: return "i/o error";
  }
  return "unknown";
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument, "hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorKind::kInvalidArgument, "non-hex character");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  const Bytes raw = from_hex(hex);
  if (raw.size() != 32) {
    throw Error(ErrorKind::kInvalidArgument, "digest must be 32 bytes");
  }
  Digest d;
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

}  // namespace mage
