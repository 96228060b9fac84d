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

#include "mage/hash_engine.hpp"

#include <cstring>

#include "mage/error.hpp"

namespace mage {
namespace {

constexpr std::array<std::uint32_t, 8> kInitialWords = {
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
    0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

constexpr std::array<std::uint32_t, 64> kRoundConstants = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

constexpr std::uint32_t rotr(std::uint32_t x, int n) {
  return (x >> n) | (x << (32 - n));
}

void compress(std::array<std::uint32_t, 8>& h, const std::uint8_t* block) {
  std::uint32_t w[64];
  for (int t = 0; t < 16; ++t) w[t] = load_be32(block + 4 * t);
  for (int t = 16; t < 64; ++t) {
    const std::uint32_t s0 =
        rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
    const std::uint32_t s1 =
        rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
    w[t] = w[t - 16] + s0 + w[t - 7] + s1;
  }

  std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
  std::uint32_t e = h[4], f = h[5], g = h[6], k = h[7];
  for (int t = 0; t < 64; ++t) {
    const std::uint32_t big_s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    const std::uint32_t ch = (e & f) ^ (~e & g);
    const std::uint32_t t1 = k + big_s1 + ch + kRoundConstants[t] + w[t];
    const std::uint32_t big_s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    const std::uint32_t t2 = big_s0 + maj;
    k = g;
    g = f;
    f = e;
    e = d + t1;
    d = c;
    c = b;
    b = a;
    a = t1 + t2;
  }
  h[0] += a;
  h[1] += b;
  h[2] += c;
  h[3] += d;
  h[4] += e;
  h[5] += f;
  h[6] += g;
  h[7] += k;
}

Digest words_to_digest(const std::array<std::uint32_t, 8>& words) {
  Digest out;
  for (int i = 0; i < 8; ++i) store_be32(out.data() + 4 * i, words[i]);
  return out;
}

}  // namespace

HashState::HashState() : words_(kInitialWords) {}

void HashState::absorb_block(ByteView block) {
  if (block.size() != kBlockSize) {
    throw Error(ErrorKind::kInvalidArgument,
                "hash block must be 64 bytes, got " +
                    std::to_string(block.size()));
  }
  compress(words_, block.data());
  byte_count_ += kBlockSize;
}

void HashState::absorb_blocks(ByteView data) {
  if (data.size() % kBlockSize != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "hash input must be a whole number of 64-byte blocks");
  }
  for (std::size_t off = 0; off < data.size(); off += kBlockSize) {
    compress(words_, data.data() + off);
  }
  byte_count_ += data.size();
}

HashState::Serialized HashState::serialize() const {
  Serialized out;
  const Digest w = words_to_digest(words_);
  std::memcpy(out.data(), w.data(), w.size());
  store_le64(out.data() + 32, byte_count_);
  return out;
}

HashState HashState::deserialize(ByteView bytes) {
  if (bytes.size() != kSerializedSize) {
    throw Error(ErrorKind::kInvalidArgument,
                "serialized hash state must be 40 bytes, got " +
                    std::to_string(bytes.size()));
  }
  HashState s;
  for (int i = 0; i < 8; ++i) s.words_[i] = load_be32(bytes.data() + 4 * i);
  s.byte_count_ = load_le64(bytes.data() + 32);
  if (s.byte_count_ % kBlockSize != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "serialized byte count is not a multiple of 64");
  }
  return s;
}

Digest HashState::finalize() && {
  // byte_count is block aligned, so padding is always exactly one block.
  Block pad{};
  pad[0] = 0x80;
  const std::uint64_t bits = byte_count_ * 8;
  for (int i = 0; i < 8; ++i) {
    pad[63 - i] = static_cast<std::uint8_t>(bits >> (8 * i));
  }
  compress(words_, pad.data());
  return words_to_digest(words_);
}

Digest HashState::premr() const { return words_to_digest(words_); }

HashState hs_update_block(HashState state, ByteView block) {
  state.absorb_block(block);
  return state;
}

Digest sha256(ByteView message) {
  std::array<std::uint32_t, 8> h = kInitialWords;
  const std::size_t full = message.size() / kBlockSize * kBlockSize;
  for (std::size_t off = 0; off < full; off += kBlockSize) {
    compress(h, message.data() + off);
  }

  std::uint8_t tail[2 * kBlockSize] = {};
  const std::size_t rem = message.size() - full;
  if (rem > 0) std::memcpy(tail, message.data() + full, rem);
  tail[rem] = 0x80;
  const std::size_t tail_len = rem + 9 <= kBlockSize ? kBlockSize : 2 * kBlockSize;
  const std::uint64_t bits = static_cast<std::uint64_t>(message.size()) * 8;
  for (int i = 0; i < 8; ++i) {
    tail[tail_len - 1 - i] = static_cast<std::uint8_t>(bits >> (8 * i));
  }
  for (std::size_t off = 0; off < tail_len; off += kBlockSize) {
    compress(h, tail + off);
  }
  return words_to_digest(h);
}

}  // namespace mage
