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

#include "mage/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>

#include <cstring>
#include <memory>
#include <string>

#include "mage/error.hpp"
#include "mage/hash_engine.hpp"

namespace mage {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
struct PkeyDeleter {
  void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

[[noreturn]] void crypto_fail(const std::string& what) {
  throw Error(ErrorKind::kCrypto, what);
}

void check_size(ByteView v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + " must be " + std::to_string(n) + " bytes");
  }
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::uint64_t load_be64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

void store_be64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
}

}  // namespace

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    crypto_fail("RAND_bytes failed");
  }
}

std::unique_ptr<RandomSource> SystemRandom::clone() const {
  return std::make_unique<SystemRandom>();
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::uint8_t in[16];
    store_le64(in, seed_);
    store_le64(in + 8, counter_++);
    const Digest block = sha256(in);
    const std::size_t n = std::min(block.size(), out.size() - pos);
    std::memcpy(out.data() + pos, block.data(), n);
    pos += n;
  }
}

std::unique_ptr<RandomSource> DeterministicRandom::clone() const {
  return std::make_unique<DeterministicRandom>(*this);
}

Digest hmac_sha256(ByteView key, ByteView message) {
  Digest out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(),
           message.size(), out.data(), &len) == nullptr ||
      len != out.size()) {
    crypto_fail("HMAC-SHA256 failed");
  }
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  PkeyCtx ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  Bytes out(length);
  std::size_t out_len = length;
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) <= 0 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &out_len) <= 0 || out_len != length) {
    crypto_fail("HKDF-SHA256 failed");
  }
  return out;
}

bool constant_time_equal(ByteView a, ByteView b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Bytes aead_seal(ByteView key, ByteView iv, ByteView aad, ByteView plaintext) {
  check_size(key, kAeadKeySize, "AEAD key");
  check_size(iv, kAeadIvSize, "AEAD IV");
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  Bytes out(plaintext.size() + kAeadTagSize);
  int len = 0;
  int total = 0;
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    crypto_fail("AES-GCM encryption failed");
  }
  total = len;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                          out.data() + plaintext.size()) != 1) {
    crypto_fail("AES-GCM finalization failed");
  }
  return out;
}

std::optional<Bytes> aead_open(ByteView key, ByteView iv, ByteView aad,
                               ByteView sealed) {
  check_size(key, kAeadKeySize, "AEAD key");
  if (iv.size() != kAeadIvSize || sealed.size() < kAeadTagSize) return std::nullopt;
  const std::size_t ct_len = sealed.size() - kAeadTagSize;
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  Bytes out(ct_len);
  Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(ct_len), sealed.end());
  int len = 0;
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), iv.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1 ||
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(),
                        static_cast<int>(ct_len)) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag.data()) != 1) {
    return std::nullopt;
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len) != 1) return std::nullopt;
  return out;
}

KeyPair X25519KeyExchange::generate(RandomSource& rng) const {
  KeyPair kp;
  kp.private_key = rng.bytes(32);
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr,
                                        kp.private_key.data(), kp.private_key.size()));
  if (!key) crypto_fail("X25519 key import failed");
  std::size_t len = 32;
  kp.public_key.resize(len);
  if (EVP_PKEY_get_raw_public_key(key.get(), kp.public_key.data(), &len) != 1 || len != 32) {
    crypto_fail("X25519 public key export failed");
  }
  return kp;
}

Bytes X25519KeyExchange::shared_secret(ByteView private_key, ByteView peer_public) const {
  if (private_key.size() != 32 || peer_public.size() != 32) {
    crypto_fail("X25519 keys must be 32 bytes");
  }
  Pkey mine(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, private_key.data(), 32));
  Pkey peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), 32));
  if (!mine || !peer) crypto_fail("X25519 key import failed");
  PkeyCtx ctx(EVP_PKEY_CTX_new(mine.get(), nullptr));
  std::size_t len = 32;
  Bytes out(len);
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) <= 0 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &len) <= 0 || len != 32) {
    // OpenSSL rejects low-order points, which yield an all-zero secret.
    crypto_fail("X25519 derivation failed");
  }
  return out;
}

KeyPair SmallGroupKeyExchange::generate(RandomSource& rng) const {
  std::uint8_t raw[8];
  rng.fill(raw);
  // Exponent in [2, p - 2].
  const std::uint64_t x = 2 + load_be64(raw) % (kPrime - 3);
  KeyPair kp;
  kp.private_key.resize(8);
  kp.public_key.resize(8);
  store_be64(kp.private_key.data(), x);
  store_be64(kp.public_key.data(), pow_mod(kGenerator, x, kPrime));
  return kp;
}

Bytes SmallGroupKeyExchange::shared_secret(ByteView private_key,
                                           ByteView peer_public) const {
  if (private_key.size() != 8 || peer_public.size() != 8) {
    crypto_fail("small-group keys must be 8 bytes");
  }
  const std::uint64_t y = load_be64(peer_public.data());
  if (y < 2 || y > kPrime - 2) crypto_fail("peer public key outside the group");
  Bytes out(8);
  store_be64(out.data(), pow_mod(y, load_be64(private_key.data()), kPrime));
  return out;
}

}  // namespace mage
