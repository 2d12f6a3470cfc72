#pragma once

// Wire-level attackers. None of these touch node state: they see, modify or
// inject bytes on the air, and whatever they learn is checked against ground
// truth by the caller.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "swarmlink/crypto.hpp"
#include "swarmlink/handshake.hpp"
#include "swarmlink/result.hpp"
#include "swarmlink/rng.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::adversary {

/// Key material an active attacker brings: its own ephemeral agreement key
/// and a signing key that is not on any roster.
struct MitmIdentity {
  crypto::AgreementKeyPair ephemeral;
  crypto::SignatureKeyPair rogue_signer;

  static MitmIdentity generate(Rng& rng);
};

/// Replaces the ephemeral public value. With `resign` the message is signed
/// again under the rogue key; otherwise the original signature is left stale.
handshake::KeyOffer mitm_substitute(const handshake::KeyOffer& offer, const MitmIdentity& id,
                                    bool resign);
handshake::KeyResponse mitm_substitute(const handshake::KeyResponse& response,
                                       const MitmIdentity& id, bool resign);

/// Session key a victim derives if it accepted the attacker's public value in
/// place of its peer's: KDF(X25519(attacker, victim_pub), context).
std::optional<crypto::SymmetricKey> mitm_candidate_key(const MitmIdentity& id, NodeId gcs, NodeId uav,
                                                       const handshake::HandshakeNonce& nonce,
                                                       const crypto::PublicPoint& victim_pub);

/// A key-substitution attacker tracking every session key it could know.
class MitmAttacker {
 public:
  MitmAttacker(MitmIdentity id, bool resign) : id_(std::move(id)), resign_(resign) {}

  /// Substitutes a KeyOffer or KeyResponse in flight. Anything else, or an
  /// undecodable message, is returned unchanged and not counted.
  Bytes intercept(ByteView wire);

  /// Learns from a handshake message without altering it: the ephemeral value
  /// it carries is what the sender pairs with a substituted one from the peer.
  void observe(ByteView wire);

  /// True when `key` equals a session key the attacker can compute.
  bool knows(const crypto::SymmetricKey& key) const { return candidates_.contains(key.bytes); }

  std::size_t attempts() const noexcept { return attempts_; }
  const MitmIdentity& identity() const noexcept { return id_; }

 private:
  MitmIdentity id_;
  bool resign_;
  void learn(const std::optional<crypto::SymmetricKey>& key);

  std::size_t attempts_ = 0;
  std::set<ByteArray<crypto::kKeySize>> candidates_;
};

struct EavesdropReport {
  std::size_t frames_observed = 0;   // distinct (origin, seq) data frames seen on air
  std::size_t frames_recovered = 0;  // of those, plaintext recovered and matching ground truth
  std::size_t recovered_unleaked = 0;  // recovered from packets of epochs the attacker was not given
  std::map<std::uint32_t, std::size_t> observed_by_epoch;
  std::map<std::uint32_t, std::size_t> recovered_by_epoch;
};

using FrameKey = std::pair<NodeId, std::uint32_t>;  // (origin, seq)

/// Tries every recorded data packet: first as cleartext, then under any
/// leaked epoch key. A frame counts as recovered only if the bytes obtained
/// equal `ground_truth` for that (origin, seq).
EavesdropReport eavesdrop_collect(std::span<const Bytes> transmissions,
                                  const std::map<std::uint32_t, crypto::SymmetricKey>& leaked_keys,
                                  const std::map<FrameKey, Bytes>& ground_truth);

/// A recorded transmission waiting to be replayed.
struct Injection {
  SimTime at{};
  Bytes wire;
  NodeId original_sender{};
  std::optional<NodeId> dest;
  std::size_t link = 0;
};

/// Records data packets it overhears and schedules verbatim re-injection.
class ReplayInjector {
 public:
  ReplayInjector(SimDuration delay, std::size_t max_injections, double record_prob)
      : delay_(delay), max_(max_injections), record_prob_(record_prob) {}

  /// Returns the injection to schedule, if the packet is recorded.
  std::optional<Injection> observe(ByteView wire, NodeId sender, std::optional<NodeId> dest,
                                   std::size_t link, SimTime now, Rng& rng);

  std::size_t recorded() const noexcept { return recorded_; }

 private:
  SimDuration delay_;
  std::size_t max_;
  double record_prob_;
  std::size_t recorded_ = 0;
};

/// A scheduled replay turned into an event at its injection time.
inline Injection replay_inject(const Injection& recorded, SimTime now) {
  Injection out = recorded;
  out.at = now;
  return out;
}

}  // namespace swarmlink::adversary
