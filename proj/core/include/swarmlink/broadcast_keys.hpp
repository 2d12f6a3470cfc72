#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "swarmlink/crypto.hpp"
#include "swarmlink/handshake.hpp"
#include "swarmlink/result.hpp"
#include "swarmlink/rng.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::bkeys {

using namespace std::chrono_literals;

inline constexpr SimDuration kDefaultKeyLifetime = 60s;
inline constexpr SimDuration kDefaultGraceWindow = 5s;

struct BroadcastKey {
  std::uint32_t epoch = 0;
  crypto::SymmetricKey key{{}, crypto::KeyPurpose::Broadcast};
  SimTime not_after{};

  friend bool operator==(const BroadcastKey&, const BroadcastKey&) = default;
};

/// Fresh random key for epoch previous_epoch + 1 (1 when previous_epoch is 0).
/// Key bytes are drawn from the rng, never derived from an earlier epoch.
BroadcastKey new_epoch(std::uint32_t previous_epoch, Rng& rng, SimTime now,
                       SimDuration key_lifetime = kDefaultKeyLifetime);

/// A broadcast key sealed for one UAV under its pairwise session key.
struct RekeyMessage {
  NodeId gcs{};
  NodeId uav{};
  crypto::Nonce nonce{};
  crypto::AeadBox box;

  friend bool operator==(const RekeyMessage&, const RekeyMessage&) = default;
};

/// msg_type ‖ gcs ‖ uav ‖ nonce ‖ box_len ‖ ciphertext ‖ tag, where box_len
/// counts ciphertext plus tag.
Bytes encode(const RekeyMessage& msg);
Result<RekeyMessage> decode_rekey(ByteView wire);

struct RekeyAck {
  NodeId uav{};
  std::uint32_t epoch = 0;

  friend bool operator==(const RekeyAck&, const RekeyAck&) = default;
};

Bytes encode(const RekeyAck& ack);
Result<RekeyAck> decode_ack(ByteView wire);

Bytes rekey_aad(NodeId gcs, NodeId uav);

/// Receive-side key state: the current epoch plus the previous one while its
/// grace window is open.
class KeyRing {
 public:
  const std::optional<BroadcastKey>& current() const noexcept { return current_; }
  const std::optional<BroadcastKey>& previous() const noexcept { return previous_; }
  SimTime grace_until() const noexcept { return grace_until_; }
  std::uint32_t current_epoch() const noexcept { return current_ ? current_->epoch : 0; }

  /// Rejects epoch <= current epoch with StaleEpoch.
  Status install(const BroadcastKey& key, SimTime now, SimDuration grace_window);

  Result<crypto::SymmetricKey> key_for_epoch(std::uint32_t epoch, SimTime now) const;

 private:
  std::optional<BroadcastKey> current_;
  std::optional<BroadcastKey> previous_;
  SimTime grace_until_{};
};

Result<RekeyMessage> wrap_for(const handshake::SessionTable& sessions, NodeId gcs, NodeId uav,
                              const BroadcastKey& bkey, Rng& rng);

/// Decrypts a rekey without touching any keyring.
Result<BroadcastKey> open_rekey(const crypto::SymmetricKey& my_session_key, const RekeyMessage& msg);

/// Opens a rekey and installs it. The keyring is untouched on any error.
/// Returns the installed epoch.
Result<std::uint32_t> unwrap(const crypto::SymmetricKey& my_session_key, const RekeyMessage& msg,
                             KeyRing& keyring, SimTime now,
                             SimDuration grace_window = kDefaultGraceWindow);

/// GCS-side authority for the rolling key.
struct GcsKeyState {
  NodeId gcs{};
  std::optional<BroadcastKey> current;
  SimDuration key_lifetime = kDefaultKeyLifetime;
};

struct Rotation {
  BroadcastKey key;
  std::vector<RekeyMessage> rekeys;  // one per UAV holding a session, in id order
};

/// Rotates when no key exists yet or now >= current.not_after.
std::optional<Rotation> rotate_if_expired(GcsKeyState& state, const handshake::SessionTable& sessions,
                                          SimTime now, Rng& rng);

}  // namespace swarmlink::bkeys
