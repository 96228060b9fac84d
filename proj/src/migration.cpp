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

#include "mage/migration.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <deque>
#include <sstream>

#include "mage/error.hpp"
#include "mage/hash_engine.hpp"
#include "mage/mage_build.hpp"

namespace mage {
namespace {

constexpr std::string_view kKdfInfo = "mage secret migration v1";
constexpr std::string_view kAckLabel = "ACK";

// Steps 1 and 2: [tag][sender_index u32][nonce 16][pub_len u16][pub][report 128]
struct Hello {
  std::uint32_t sender_index = 0;
  Nonce nonce{};
  Bytes public_key;
  Report report;
};

// Steps 3 and 4: [tag][nonce 16][iv 12][sealed...]
struct Sealed {
  Nonce nonce{};
  Bytes iv;
  Bytes body;
};

Bytes encode_hello(std::uint8_t tag, const Hello& h) {
  Bytes out;
  out.reserve(1 + 4 + kNonceSize + 2 + h.public_key.size() + kReportSize);
  out.push_back(tag);
  std::uint8_t idx[4];
  store_le32(idx, h.sender_index);
  out.insert(out.end(), idx, idx + 4);
  append(out, h.nonce);
  out.push_back(static_cast<std::uint8_t>(h.public_key.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>(h.public_key.size() >> 8));
  append(out, h.public_key);
  append(out, h.report.serialize());
  return out;
}

std::optional<Hello> decode_hello(std::uint8_t tag, ByteView in) {
  constexpr std::size_t kFixed = 1 + 4 + kNonceSize + 2;
  if (in.size() < kFixed + kReportSize || in[0] != tag) return std::nullopt;
  Hello h;
  h.sender_index = load_le32(in.data() + 1);
  std::memcpy(h.nonce.data(), in.data() + 5, kNonceSize);
  const std::size_t pub_len = in[21] | (std::size_t{in[22]} << 8);
  if (in.size() != kFixed + pub_len + kReportSize) return std::nullopt;
  h.public_key.assign(in.begin() + kFixed, in.begin() + static_cast<std::ptrdiff_t>(kFixed + pub_len));
  h.report = Report::parse(in.subspan(kFixed + pub_len));
  return h;
}

Bytes encode_sealed(std::uint8_t tag, const Sealed& s) {
  Bytes out;
  out.reserve(1 + kNonceSize + s.iv.size() + s.body.size());
  out.push_back(tag);
  append(out, s.nonce);
  append(out, s.iv);
  append(out, s.body);
  return out;
}

std::optional<Sealed> decode_sealed(std::uint8_t tag, ByteView in) {
  constexpr std::size_t kFixed = 1 + kNonceSize + kAeadIvSize;
  if (in.size() < kFixed + kAeadTagSize || in[0] != tag) return std::nullopt;
  Sealed s;
  std::memcpy(s.nonce.data(), in.data() + 1, kNonceSize);
  s.iv.assign(in.begin() + 1 + kNonceSize, in.begin() + kFixed);
  s.body.assign(in.begin() + kFixed, in.end());
  return s;
}

Bytes aad_for(std::uint8_t tag, const Nonce& nonce) {
  Bytes aad(1 + kNonceSize);
  aad[0] = tag;
  std::copy(nonce.begin(), nonce.end(), aad.begin() + 1);
  return aad;
}

// sha256 over the concatenated parts, then 32 zero bytes.
ReportData bind(std::initializer_list<ByteView> parts) {
  Bytes msg;
  for (ByteView p : parts) append(msg, p);
  const Digest d = sha256(msg);
  ReportData out{};
  std::memcpy(out.data(), d.data(), d.size());
  return out;
}

Bytes ack_plaintext(ByteView secret) {
  Bytes out(kAckLabel.begin(), kAckLabel.end());
  append(out, sha256(secret));
  return out;
}

Bytes session_key_from(ByteView shared, const Nonce& nonce) {
  const ByteView info(reinterpret_cast<const std::uint8_t*>(kKdfInfo.data()),
                      kKdfInfo.size());
  return hkdf_sha256(shared, nonce, info, kAeadKeySize);
}

}  // namespace

std::string_view to_string(PartyState s) {
  switch (s) {
    case PartyState::kIdle: return "Idle";
    case PartyState::kAwaitB: return "AwaitB";
    case PartyState::kAwaitSecret: return "AwaitSecret";
    case PartyState::kDone: return "Done";
    case PartyState::kAborted: return "Aborted";
  }
  return "?";
}

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::kNone: return "none";
    case AbortReason::kIdentity: return "identity";
    case AbortReason::kAuth: return "auth";
    case AbortReason::kIntegrity: return "integrity";
    case AbortReason::kReplay: return "replay";
    case AbortReason::kTimeout: return "timeout";
  }
  return "?";
}

std::string_view to_string(AckStatus a) {
  switch (a) {
    case AckStatus::kNotApplicable: return "n/a";
    case AckStatus::kPending: return "pending";
    case AckStatus::kConfirmed: return "confirmed";
    case AckStatus::kFailed: return "failed";
  }
  return "?";
}

std::string PartyOutcome::to_string() const {
  std::string out(mage::to_string(state));
  if (state == PartyState::kAborted) {
    out += "(" + std::string(mage::to_string(reason)) + ")";
  }
  return out;
}

EnclaveRuntime::EnclaveRuntime(std::shared_ptr<const EnclaveImage> image,
                               std::uint64_t group_index,
                               std::shared_ptr<const Platform> platform,
                               std::shared_ptr<const KeyExchange> kex,
                               std::unique_ptr<RandomSource> rng)
    : image_(std::move(image)),
      group_index_(group_index),
      platform_(std::move(platform)),
      kex_(std::move(kex)),
      rng_(std::move(rng)) {
  measurement_ = final_measurement(*image_);
  view_ = MageView::of(*image_);
}

EnclaveRuntime::EnclaveRuntime(const EnclaveRuntime& other)
    : image_(other.image_),
      group_index_(other.group_index_),
      platform_(other.platform_),
      kex_(other.kex_),
      host_(other.host_),
      rng_(other.rng_->clone()),
      measurement_(other.measurement_),
      view_(other.view_),
      state_(other.state_),
      reason_(other.reason_),
      ack_(other.ack_),
      ack_failure_(other.ack_failure_),
      peer_index_(other.peer_index_),
      nonce_(other.nonce_),
      keys_(other.keys_),
      peer_public_(other.peer_public_),
      session_key_(other.session_key_),
      secret_(other.secret_),
      received_(other.received_),
      seen_nonces_(other.seen_nonces_) {}

EnclaveRuntime& EnclaveRuntime::operator=(const EnclaveRuntime& other) {
  if (this != &other) {
    EnclaveRuntime copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::optional<Measurement> EnclaveRuntime::derive(std::uint64_t index) const {
  try {
    switch (view_.variant) {
      case Variant::kBasic:
        return derive_measurement(view_, index);
      case Variant::kSplit: {
        Bytes post;
        if (host_) {
          if (auto it = host_->post_content.find(index); it != host_->post_content.end()) {
            post = it->second;
          }
        }
        return derive_measurement_split(view_, index, post);
      }
      case Variant::kMerkle: {
        if (!host_ || !host_->sidecar || index >= host_->sidecar->entries.size()) {
          return std::nullopt;
        }
        return merkle_derive(view_, index, host_->sidecar->entries[index],
                             host_->sidecar->proofs[index]);
      }
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

void EnclaveRuntime::abort(AbortReason r) {
  state_ = PartyState::kAborted;
  reason_ = r;
}

Bytes EnclaveRuntime::initiate(std::uint64_t target_index) {
  if (state_ != PartyState::kIdle) {
    throw Error(ErrorKind::kInvalidArgument, "initiate requires an idle runtime");
  }
  const auto target = derive(target_index);
  if (!target) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "cannot derive the measurement of group member " +
                    std::to_string(target_index));
  }
  peer_index_ = target_index;
  Nonce nonce;
  rng_->fill(nonce);
  nonce_ = nonce;
  seen_nonces_.insert(nonce);
  keys_ = kex_->generate(*rng_);

  Hello h;
  h.sender_index = static_cast<std::uint32_t>(group_index_);
  h.nonce = nonce;
  h.public_key = keys_->public_key;
  h.report = platform_->ereport(measurement_, *target, bind({keys_->public_key, nonce}));
  state_ = PartyState::kAwaitB;
  return encode_hello(1, h);
}

std::optional<Bytes> EnclaveRuntime::respond(ByteView step1) {
  if (state_ != PartyState::kIdle) return std::nullopt;
  const auto hello = decode_hello(1, step1);
  if (!hello) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  const auto expected = derive(hello->sender_index);
  if (!expected || *expected != hello->report.attester_measurement) {
    abort(AbortReason::kIdentity);
    return std::nullopt;
  }
  if (!platform_->verify_report(measurement_, hello->report)) {
    abort(AbortReason::kAuth);
    return std::nullopt;
  }
  if (bind({hello->public_key, hello->nonce}) != hello->report.report_data) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  if (seen_nonces_.contains(hello->nonce)) {
    abort(AbortReason::kReplay);
    return std::nullopt;
  }
  seen_nonces_.insert(hello->nonce);

  keys_ = kex_->generate(*rng_);
  try {
    session_key_ = session_key_from(
        kex_->shared_secret(keys_->private_key, hello->public_key), hello->nonce);
  } catch (const Error&) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  peer_index_ = hello->sender_index;
  nonce_ = hello->nonce;
  peer_public_ = hello->public_key;

  Hello reply;
  reply.sender_index = static_cast<std::uint32_t>(group_index_);
  reply.nonce = hello->nonce;
  reply.public_key = keys_->public_key;
  reply.report = platform_->ereport(
      measurement_, *expected, bind({hello->public_key, keys_->public_key, hello->nonce}));
  state_ = PartyState::kAwaitSecret;
  return encode_hello(2, reply);
}

std::optional<Bytes> EnclaveRuntime::provision(ByteView step2) {
  if (state_ != PartyState::kAwaitB) return std::nullopt;
  const auto hello = decode_hello(2, step2);
  if (!hello) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  const auto expected = derive(peer_index_);
  if (hello->sender_index != peer_index_ || !expected ||
      *expected != hello->report.attester_measurement) {
    abort(AbortReason::kIdentity);
    return std::nullopt;
  }
  if (!platform_->verify_report(measurement_, hello->report)) {
    abort(AbortReason::kAuth);
    return std::nullopt;
  }
  if (hello->nonce != *nonce_) {
    abort(AbortReason::kReplay);
    return std::nullopt;
  }
  if (bind({keys_->public_key, hello->public_key, *nonce_}) != hello->report.report_data) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  try {
    session_key_ = session_key_from(
        kex_->shared_secret(keys_->private_key, hello->public_key), *nonce_);
  } catch (const Error&) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  peer_public_ = hello->public_key;

  Sealed s;
  s.nonce = *nonce_;
  s.iv = rng_->bytes(kAeadIvSize);
  s.body = aead_seal(*session_key_, s.iv, aad_for(3, s.nonce), secret_.value_or(Bytes{}));
  state_ = PartyState::kDone;
  ack_ = AckStatus::kPending;
  return encode_sealed(3, s);
}

std::optional<Bytes> EnclaveRuntime::acknowledge(ByteView step3) {
  if (state_ != PartyState::kAwaitSecret) return std::nullopt;
  const auto sealed = decode_sealed(3, step3);
  if (!sealed) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  if (sealed->nonce != *nonce_) {
    abort(AbortReason::kReplay);
    return std::nullopt;
  }
  auto plain = aead_open(*session_key_, sealed->iv, aad_for(3, sealed->nonce), sealed->body);
  if (!plain) {
    abort(AbortReason::kIntegrity);
    return std::nullopt;
  }
  received_ = std::move(*plain);

  Sealed ack;
  ack.nonce = *nonce_;
  ack.iv = rng_->bytes(kAeadIvSize);
  ack.body = aead_seal(*session_key_, ack.iv, aad_for(4, ack.nonce), ack_plaintext(*received_));
  state_ = PartyState::kDone;
  return encode_sealed(4, ack);
}

void EnclaveRuntime::receive_ack(ByteView step4) {
  if (state_ != PartyState::kDone || ack_ != AckStatus::kPending) return;
  auto fail = [this](AbortReason r) {
    ack_ = AckStatus::kFailed;
    ack_failure_ = r;
  };
  const auto sealed = decode_sealed(4, step4);
  if (!sealed) return fail(AbortReason::kIntegrity);
  if (sealed->nonce != *nonce_) return fail(AbortReason::kReplay);
  const auto plain =
      aead_open(*session_key_, sealed->iv, aad_for(4, sealed->nonce), sealed->body);
  if (!plain || *plain != ack_plaintext(secret_.value_or(Bytes{}))) {
    return fail(AbortReason::kIntegrity);
  }
  ack_ = AckStatus::kConfirmed;
}

std::optional<Bytes> EnclaveRuntime::handle(ByteView message) {
  if (message.empty()) return std::nullopt;
  switch (message[0]) {
    case 1: return respond(message);
    case 2: return provision(message);
    case 3: return acknowledge(message);
    case 4: receive_ack(message); return std::nullopt;
    default: return std::nullopt;
  }
}

void EnclaveRuntime::expire() {
  if (state_ == PartyState::kAwaitB || state_ == PartyState::kAwaitSecret) {
    abort(AbortReason::kTimeout);
  }
  if (ack_ == AckStatus::kPending) {
    ack_ = AckStatus::kFailed;
    ack_failure_ = AbortReason::kTimeout;
  }
}

void EnclaveRuntime::reset() {
  state_ = PartyState::kIdle;
  reason_ = AbortReason::kNone;
  ack_ = AckStatus::kNotApplicable;
  ack_failure_ = AbortReason::kNone;
  peer_index_ = 0;
  nonce_.reset();
  keys_.reset();
  peer_public_.clear();
  session_key_.reset();
  received_.reset();
}

Adversary Adversary::parse(std::string_view spec) {
  Adversary a;
  if (spec == "honest" || spec.empty()) return a;
  const auto colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  if (kind == "drop") {
    a.kind = Kind::kDrop;
  } else if (kind == "replay") {
    a.kind = Kind::kReplay;
  } else if (kind == "tamper") {
    a.kind = Kind::kTamper;
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown adversary '" + std::string(spec) + "'");
  }
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::kInvalidArgument, "adversary needs a step: " + std::string(spec));
  }
  const std::string_view rest = spec.substr(colon + 1);
  const auto colon2 = rest.find(':');
  auto number = [&](std::string_view text, auto& out) {
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "bad adversary spec '" + std::string(spec) + "'");
    }
  };
  number(rest.substr(0, colon2), a.step);
  if (colon2 != std::string_view::npos) {
    if (a.kind != Kind::kTamper) {
      throw Error(ErrorKind::kInvalidArgument, "only tamper takes a byte index: " + std::string(spec));
    }
    number(rest.substr(colon2 + 1), a.byte_index);
  } else {
    a.byte_index = default_tamper_index(a.step);
  }
  if (a.step < 1 || a.step > 4) {
    throw Error(ErrorKind::kInvalidArgument, "adversary step must be 1..4");
  }
  return a;
}

std::string Adversary::to_string() const {
  switch (kind) {
    case Kind::kHonest: return "honest";
    case Kind::kDrop: return "drop:" + std::to_string(step);
    case Kind::kReplay: return "replay:" + std::to_string(step);
    case Kind::kTamper:
      return "tamper:" + std::to_string(step) + ":" + std::to_string(byte_index);
  }
  return "?";
}

std::size_t default_tamper_index(int step) {
  return step <= 2 ? 1 + 4 + kNonceSize + 2 : 1 + kNonceSize + kAeadIvSize;
}

std::optional<Bytes> Channel::transmit(int step, Direction dir, Bytes message) {
  const bool targeted = adversary_.kind != Adversary::Kind::kHonest && adversary_.step == step;
  if (!targeted) {
    transcript_.push_back({step, dir, message, "delivered"});
    return message;
  }
  switch (adversary_.kind) {
    case Adversary::Kind::kDrop:
      transcript_.push_back({step, dir, std::move(message), "dropped"});
      return std::nullopt;
    case Adversary::Kind::kTamper: {
      if (message.empty()) break;
      const std::size_t at = adversary_.byte_index % message.size();
      message[at] ^= 0x01;
      transcript_.push_back({step, dir, message, "tampered@" + std::to_string(at)});
      return message;
    }
    case Adversary::Kind::kReplay: {
      const auto it = previous_.find(step);
      if (it == previous_.end()) break;
      transcript_.push_back({step, dir, std::move(message), "suppressed"});
      transcript_.push_back({step, dir, it->second, "replayed"});
      return it->second;
    }
    case Adversary::Kind::kHonest:
      break;
  }
  transcript_.push_back({step, dir, message, "delivered"});
  return message;
}

std::map<int, Bytes> Channel::delivered_by_step() const {
  std::map<int, Bytes> out;
  for (const auto& e : transcript_) {
    if (e.annotation == "delivered") out[e.step] = e.payload;
  }
  return out;
}

std::string Channel::export_transcript(std::string_view kex_name) const {
  std::ostringstream out;
  out << "# mage-transcript v1 mac=" << Platform::kMacName
      << " kdf=HKDF-SHA256 aead=AES-256-GCM kex=" << kex_name
      << " adversary=" << adversary_.to_string() << "\n";
  for (const auto& e : transcript_) {
    out << e.step << ' '
        << (e.direction == Direction::kInitiatorToResponder ? "A->B" : "B->A") << ' '
        << to_hex(e.payload) << ' ' << e.annotation << '\n';
  }
  return out.str();
}

SessionResult run_session(EnclaveRuntime& initiator, EnclaveRuntime& responder,
                          Channel& channel, const Bytes& secret) {
  if (channel.adversary().kind == Adversary::Kind::kReplay && !channel.has_replay_source()) {
    Channel warmup;
    run_session(initiator, responder, warmup, secret);
    channel.set_replay_source(warmup.delivered_by_step());
    initiator.reset();
    responder.reset();
  }

  initiator.load_secret(secret);
  struct InFlight {
    int step;
    Direction dir;
    Bytes payload;
  };
  std::deque<InFlight> queue;
  queue.push_back({1, Direction::kInitiatorToResponder, initiator.initiate(responder.group_index())});

  int budget = kStepBudget;
  while (!queue.empty() && budget-- > 0) {
    InFlight msg = std::move(queue.front());
    queue.pop_front();
    auto delivered = channel.transmit(msg.step, msg.dir, std::move(msg.payload));
    if (!delivered) continue;
    EnclaveRuntime& receiver =
        msg.dir == Direction::kInitiatorToResponder ? responder : initiator;
    if (auto reply = receiver.handle(*delivered)) {
      const Direction back = msg.dir == Direction::kInitiatorToResponder
                                 ? Direction::kResponderToInitiator
                                 : Direction::kInitiatorToResponder;
      queue.push_back({msg.step + 1, back, std::move(*reply)});
    }
  }
  initiator.expire();
  responder.expire();

  SessionResult r;
  r.initiator = {initiator.state(), initiator.abort_reason()};
  r.responder = {responder.state(), responder.abort_reason()};
  r.ack = initiator.ack_status();
  r.ack_failure = initiator.ack_failure();
  r.delivered_secret = responder.received_secret();
  r.transcript = channel.export_transcript(initiator.kex_name());
  return r;
}

}  // namespace mage
