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
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "mage/bytes.hpp"

namespace mage {

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
  virtual std::unique_ptr<RandomSource> clone() const = 0;

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }
};

// OpenSSL's CSPRNG. clone() returns an independent instance.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
  std::unique_ptr<RandomSource> clone() const override;
};

// sha256(seed || counter) stream for reproducible fixtures.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed) : seed_(seed) {}
  void fill(std::span<std::uint8_t> out) override;
  std::unique_ptr<RandomSource> clone() const override;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

Digest hmac_sha256(ByteView key, ByteView message);
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);
bool constant_time_equal(ByteView a, ByteView b);

inline constexpr std::size_t kAeadKeySize = 32;
inline constexpr std::size_t kAeadIvSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;

// AES-256-GCM. seal returns ciphertext || tag; open returns nullopt on any
// authentication failure.
Bytes aead_seal(ByteView key, ByteView iv, ByteView aad, ByteView plaintext);
std::optional<Bytes> aead_open(ByteView key, ByteView iv, ByteView aad,
                               ByteView sealed);

struct KeyPair {
  Bytes private_key;
  Bytes public_key;
};

// Diffie-Hellman over some group. shared_secret throws kCrypto on a peer
// key that is not a valid group element.
class KeyExchange {
 public:
  virtual ~KeyExchange() = default;
  virtual std::string_view name() const = 0;
  virtual std::size_t public_key_size() const = 0;
  virtual KeyPair generate(RandomSource& rng) const = 0;
  virtual Bytes shared_secret(ByteView private_key, ByteView peer_public) const = 0;
};

class X25519KeyExchange final : public KeyExchange {
 public:
  std::string_view name() const override { return "X25519"; }
  std::size_t public_key_size() const override { return 32; }
  KeyPair generate(RandomSource& rng) const override;
  Bytes shared_secret(ByteView private_key, ByteView peer_public) const override;
};

// Multiplicative group mod the prime 2^64 - 59, generator 5. Tiny and
// insecure; exists so fixtures and exhaustive tests are cheap and
// reproducible.
class SmallGroupKeyExchange final : public KeyExchange {
 public:
  static constexpr std::uint64_t kPrime = 0xffffffffffffffc5ull;
  static constexpr std::uint64_t kGenerator = 5;

  std::string_view name() const override { return "DH-2^64-59"; }
  std::size_t public_key_size() const override { return 8; }
  KeyPair generate(RandomSource& rng) const override;
  Bytes shared_secret(ByteView private_key, ByteView peer_public) const override;
};

}  // namespace mage
