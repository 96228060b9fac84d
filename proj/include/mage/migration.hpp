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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mage/attest_sim.hpp"
#include "mage/bytes.hpp"
#include "mage/crypto.hpp"
#include "mage/enclave_image.hpp"
#include "mage/mage_derive.hpp"
#include "mage/merkle.hpp"

namespace mage {

enum class PartyState { kIdle, kAwaitB, kAwaitSecret, kDone, kAborted };

enum class AbortReason {
  kNone,
  kIdentity,   // peer measurement differs from the derived one
  kAuth,       // report MAC does not verify under our report key
  kIntegrity,  // hash binding, decoding or authenticated decryption failed
  kReplay,     // nonce reused or not ours
  kTimeout,    // harness step budget exhausted while waiting
};

// What the initiator learns about the optional step-4 acknowledgement. The
// initiator is already Done once the secret is sent.
enum class AckStatus { kNotApplicable, kPending, kConfirmed, kFailed };

std::string_view to_string(PartyState s);
std::string_view to_string(AbortReason r);
std::string_view to_string(AckStatus a);

inline constexpr std::size_t kNonceSize = 16;

// Untrusted storage the host hands out on request (the OCall path): post-MARS
// page records for split groups, the sidecar for merkle groups.
struct HostStorage {
  std::map<std::uint64_t, Bytes> post_content;
  std::optional<MerkleSidecar> sidecar;
};
using Nonce = std::array<std::uint8_t, kNonceSize>;

// One simulated enclave taking part in a migration session. Copyable: the
// random source is cloned, image and platform are shared read-only.
class EnclaveRuntime {
 public:
  // group_index is the entry this enclave claims in the shared MARS.
  EnclaveRuntime(std::shared_ptr<const EnclaveImage> image,
                 std::uint64_t group_index,
                 std::shared_ptr<const Platform> platform,
                 std::shared_ptr<const KeyExchange> kex,
                 std::unique_ptr<RandomSource> rng);
  EnclaveRuntime(const EnclaveRuntime& other);
  EnclaveRuntime& operator=(const EnclaveRuntime& other);
  EnclaveRuntime(EnclaveRuntime&&) noexcept = default;
  EnclaveRuntime& operator=(EnclaveRuntime&&) noexcept = default;

  const Measurement& measurement() const { return measurement_; }
  const MageView& view() const { return view_; }
  std::uint64_t group_index() const { return group_index_; }
  std::string_view kex_name() const { return kex_->name(); }
  PartyState state() const { return state_; }
  AbortReason abort_reason() const { return reason_; }
  AckStatus ack_status() const { return ack_; }
  AbortReason ack_failure() const { return ack_failure_; }
  const std::optional<Nonce>& nonce() const { return nonce_; }

  void attach_host_storage(std::shared_ptr<const HostStorage> host) {
    host_ = std::move(host);
  }

  void load_secret(Bytes secret) { secret_ = std::move(secret); }
  const std::optional<Bytes>& received_secret() const { return received_; }
  // Exposed so tests can check it never reaches the wire.
  const std::optional<Bytes>& session_key() const { return session_key_; }
  const std::optional<KeyPair>& ephemeral_keys() const { return keys_; }

  // Step 1 (initiator, Idle -> AwaitB). Derives the target's measurement
  // from our own MARS. Throws kIndexOutOfRange for an unknown target.
  Bytes initiate(std::uint64_t target_index);
  // Step 2 (responder, Idle -> AwaitSecret or Aborted).
  std::optional<Bytes> respond(ByteView step1);
  // Step 3 (initiator, AwaitB -> Done or Aborted).
  std::optional<Bytes> provision(ByteView step2);
  // Step 4 (responder, AwaitSecret -> Done or Aborted).
  std::optional<Bytes> acknowledge(ByteView step3);
  // Initiator, Done: checks the acknowledgement.
  void receive_ack(ByteView step4);

  // Routes a message by its step tag. Messages that do not fit the current
  // state are ignored and nullopt is returned.
  std::optional<Bytes> handle(ByteView message);

  // Step budget exhausted: waiting states become Aborted(timeout) and a
  // pending acknowledgement fails with kTimeout.
  void expire();

  // Back to Idle for another session. The replay cache survives.
  void reset();

 private:
  void abort(AbortReason r);
  std::optional<Measurement> derive(std::uint64_t index) const;

  std::shared_ptr<const EnclaveImage> image_;
  std::uint64_t group_index_;
  std::shared_ptr<const Platform> platform_;
  std::shared_ptr<const KeyExchange> kex_;
  std::shared_ptr<const HostStorage> host_;
  std::unique_ptr<RandomSource> rng_;
  Measurement measurement_{};
  MageView view_;

  PartyState state_ = PartyState::kIdle;
  AbortReason reason_ = AbortReason::kNone;
  AckStatus ack_ = AckStatus::kNotApplicable;
  AbortReason ack_failure_ = AbortReason::kNone;

  std::uint64_t peer_index_ = 0;
  std::optional<Nonce> nonce_;
  std::optional<KeyPair> keys_;
  Bytes peer_public_;
  std::optional<Bytes> session_key_;
  std::optional<Bytes> secret_;
  std::optional<Bytes> received_;
  std::set<Nonce> seen_nonces_;
};

enum class Direction { kInitiatorToResponder, kResponderToInitiator };

struct Adversary {
  enum class Kind { kHonest, kDrop, kReplay, kTamper };

  Kind kind = Kind::kHonest;
  int step = 0;                 // 1..4
  std::size_t byte_index = 0;   // tamper only; wraps modulo message length

  // "honest", "drop:N", "replay:N", "tamper:N" or "tamper:N:BYTE".
  static Adversary parse(std::string_view spec);
  std::string to_string() const;
};

struct TranscriptEntry {
  int step = 0;
  Direction direction = Direction::kInitiatorToResponder;
  Bytes payload;
  std::string annotation;  // delivered, dropped, tampered@N, replayed, suppressed
};

// Default byte the tamper adversary flips for each step: inside the public
// key for steps 1 and 2, inside the ciphertext for 3 and 4.
std::size_t default_tamper_index(int step);

class Channel {
 public:
  explicit Channel(Adversary adversary = {}) : adversary_(adversary) {}

  const Adversary& adversary() const { return adversary_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

  // Messages of an earlier session, used by the replay adversary.
  void set_replay_source(std::map<int, Bytes> previous) {
    previous_ = std::move(previous);
  }
  bool has_replay_source() const { return !previous_.empty(); }

  // Logs the message and returns what reaches the receiver, if anything.
  std::optional<Bytes> transmit(int step, Direction dir, Bytes message);

  // Messages delivered so far, keyed by step.
  std::map<int, Bytes> delivered_by_step() const;

  // Header line names the primitives and the adversary, then one line per
  // message: "<step> <A->B|B->A> <hex> <annotation>".
  std::string export_transcript(std::string_view kex_name) const;

 private:
  Adversary adversary_;
  std::map<int, Bytes> previous_;
  std::vector<TranscriptEntry> transcript_;
};

struct PartyOutcome {
  PartyState state = PartyState::kIdle;
  AbortReason reason = AbortReason::kNone;

  std::string to_string() const;
  bool operator==(const PartyOutcome&) const = default;
};

struct SessionResult {
  PartyOutcome initiator;
  PartyOutcome responder;
  AckStatus ack = AckStatus::kNotApplicable;
  AbortReason ack_failure = AbortReason::kNone;
  std::optional<Bytes> delivered_secret;
  std::string transcript;

  bool secret_migrated() const {
    return initiator.state == PartyState::kDone &&
           responder.state == PartyState::kDone && delivered_secret.has_value();
  }
};

inline constexpr int kStepBudget = 8;

// Drives the four steps through the channel. With a replay adversary and no
// recorded session, an honest warm-up session between the same runtimes is
// run first and its messages become the replay source. Aborts are outcomes,
// not errors.
SessionResult run_session(EnclaveRuntime& initiator, EnclaveRuntime& responder,
                          Channel& channel, const Bytes& secret);

}  // namespace mage
