#pragma once

// GCS-initiated pairwise key agreement. Each side signs its ephemeral X25519
// public value under a preloaded Ed25519 key; the receiver verifies against
// the roster before deriving the shared session key.

#include <chrono>
#include <map>
#include <optional>
#include <vector>

#include "swarmlink/crypto.hpp"
#include "swarmlink/result.hpp"
#include "swarmlink/rng.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::handshake {

using namespace std::chrono_literals;

using HandshakeNonce = ByteArray<16>;

inline constexpr SimDuration kDefaultTimeout = 5s;
inline constexpr std::size_t kWireSize = 1 + 2 + 2 + 32 + 16 + 64;

/// The GCS plus the swarm, with every member's preloaded verification key.
struct SwarmRoster {
  NodeId gcs_id{};
  std::vector<NodeId> uav_ids;
  std::map<NodeId, crypto::VerifyKey> sig_pubkeys;

  bool contains(NodeId id) const;
  bool is_uav(NodeId id) const;
  std::optional<crypto::VerifyKey> key_of(NodeId id) const;

  /// Throws std::invalid_argument naming the broken constraint.
  void validate() const;
};

struct KeyOffer {
  NodeId sender{};
  NodeId recipient{};
  crypto::PublicPoint ephemeral_pub{};
  HandshakeNonce nonce{};
  crypto::Signature signature{};

  friend bool operator==(const KeyOffer&, const KeyOffer&) = default;
};

struct KeyResponse {
  NodeId sender{};
  NodeId recipient{};  // always the GCS
  crypto::PublicPoint ephemeral_pub{};
  HandshakeNonce nonce{};
  crypto::Signature signature{};

  friend bool operator==(const KeyResponse&, const KeyResponse&) = default;
};

/// sender ‖ recipient ‖ ephemeral_pub ‖ nonce, the bytes covered by the signature.
Bytes signed_payload(NodeId sender, NodeId recipient, const crypto::PublicPoint& ephemeral_pub,
                     const HandshakeNonce& nonce);

/// "swarmlink-v1|<gcs>|<uav>|" followed by the raw 16-byte handshake nonce.
Bytes session_context(NodeId gcs, NodeId uav, const HandshakeNonce& nonce);

Bytes encode(const KeyOffer& offer);
Bytes encode(const KeyResponse& response);
Result<KeyOffer> decode_offer(ByteView wire);
Result<KeyResponse> decode_response(ByteView wire);

struct Session {
  crypto::SymmetricKey key;
  SimTime established_at{};
};

struct PendingHandshake {
  NodeId uav{};
  crypto::AgreementKeyPair ephemeral;
  SimTime deadline{};
};

/// GCS-side handshake state: at most one session per UAV plus outstanding
/// offers keyed by nonce.
class SessionTable {
 public:
  const Session* session(NodeId uav) const;
  bool has_session(NodeId uav) const { return session(uav) != nullptr; }
  void install(NodeId uav, Session s);
  void drop_session(NodeId uav);

  const PendingHandshake* pending(const HandshakeNonce& nonce) const;
  bool has_pending_for(NodeId uav) const;
  void add_pending(const HandshakeNonce& nonce, PendingHandshake p);
  void remove_pending(const HandshakeNonce& nonce);

  const std::map<NodeId, Session>& sessions() const noexcept { return established_; }
  std::size_t pending_count() const noexcept { return pending_.size(); }

  /// Removes entries whose deadline < now; returns their UAV ids in nonce order.
  std::vector<NodeId> expire(SimTime now);

 private:
  std::map<NodeId, Session> established_;
  std::map<HandshakeNonce, PendingHandshake> pending_;
};

Result<KeyOffer> gcs_start_handshake(SessionTable& table, const SwarmRoster& roster,
                                     const crypto::SignatureKeyPair& gcs_key, NodeId uav,
                                     Rng& rng, SimTime now,
                                     SimDuration timeout = kDefaultTimeout);

struct UavAccept {
  KeyResponse response;
  crypto::SymmetricKey session_key;
};

/// `verify_signatures = false` exists only for the control experiment that
/// shows what an unauthenticated exchange gives away.
Result<UavAccept> uav_on_offer(const SwarmRoster& roster, NodeId my_id,
                               const crypto::SignatureKeyPair& my_key, const KeyOffer& offer,
                               Rng& rng, bool verify_signatures = true);

Result<crypto::SymmetricKey> gcs_on_response(SessionTable& table, const SwarmRoster& roster,
                                             const KeyResponse& response, SimTime now,
                                             bool verify_signatures = true);

std::vector<NodeId> expire_pending(SessionTable& table, SimTime now);

}  // namespace swarmlink::handshake
