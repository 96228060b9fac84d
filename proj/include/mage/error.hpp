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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mage {

// Every failure the library reports is one of these. Callers that need to
// tell failures apart (the CLI's exit codes, tests) switch on the kind.
enum class ErrorKind {
  kInvalidArgument,   // wrong length, bad parameter
  kMisaligned,        // offset not page/chunk aligned
  kOutOfRange,        // page outside the enclave range
  kOverlap,           // two pages at the same offset
  kBadMagic,
  kBadVersion,
  kTruncated,         // byte string too short or too long for its header
  kMarsOutOfBounds,   // MARS range does not fit the page table
  kMalformedSection,  // MARS content not a valid section for its variant
  kMissingMars,
  kSizeMismatch,      // group members reserve MARS ranges of different size
  kCapacityExceeded,
  kIndexOutOfRange,   // derivation index >= entry count
  kIntegrity,         // host-supplied content does not match its digest
  kProofInvalid,      // Merkle inclusion proof does not reach the root
  kCrypto,            // failure inside the crypto backend
  kIo,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mage
