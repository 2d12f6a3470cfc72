#include "swarmlink/broadcast_keys.hpp"

#include "swarmlink/bytes.hpp"

namespace swarmlink::bkeys {

namespace {

constexpr std::size_t kRekeyPlaintextSize = 4 + crypto::kKeySize + 8;

Bytes rekey_plaintext(const BroadcastKey& key) {
  ByteWriter w(kRekeyPlaintextSize);
  w.u32(key.epoch).bytes(key.key.bytes).u64(static_cast<std::uint64_t>(key.not_after.count()));
  return std::move(w).take();
}

}  // namespace

BroadcastKey new_epoch(std::uint32_t previous_epoch, Rng& rng, SimTime now,
                       SimDuration key_lifetime) {
  BroadcastKey key;
  key.epoch = previous_epoch + 1;
  key.key.bytes = rng.array<crypto::kKeySize>();
  key.key.purpose = crypto::KeyPurpose::Broadcast;
  key.not_after = now + key_lifetime;
  return key;
}

Bytes rekey_aad(NodeId gcs, NodeId uav) {
  ByteWriter w(9);
  w.str("rekey").u16(raw(gcs)).u16(raw(uav));
  return std::move(w).take();
}

Bytes encode(const RekeyMessage& msg) {
  const auto box = msg.box.serialize();
  ByteWriter w(1 + 2 + 2 + crypto::kNonceSize + 2 + box.size());
  w.u8(static_cast<std::uint8_t>(MsgType::Rekey))
      .u16(raw(msg.gcs))
      .u16(raw(msg.uav))
      .bytes(msg.nonce)
      .u16(static_cast<std::uint16_t>(box.size()))
      .bytes(box);
  return std::move(w).take();
}

Result<RekeyMessage> decode_rekey(ByteView wire) {
  ByteReader r(wire);
  if (r.u8() != static_cast<std::uint8_t>(MsgType::Rekey)) return Errc::Malformed;
  RekeyMessage msg;
  msg.gcs = node_id(r.u16());
  msg.uav = node_id(r.u16());
  msg.nonce = r.array<crypto::kNonceSize>();
  const std::uint16_t box_len = r.u16();
  if (!r.ok() || r.remaining() != box_len) return Errc::Malformed;
  auto box = crypto::AeadBox::parse(r.bytes(box_len));
  if (!box) return Errc::Malformed;
  msg.box = std::move(*box);
  return msg;
}

Bytes encode(const RekeyAck& ack) {
  ByteWriter w(7);
  w.u8(static_cast<std::uint8_t>(MsgType::RekeyAck)).u16(raw(ack.uav)).u32(ack.epoch);
  return std::move(w).take();
}

Result<RekeyAck> decode_ack(ByteView wire) {
  ByteReader r(wire);
  if (r.u8() != static_cast<std::uint8_t>(MsgType::RekeyAck)) return Errc::Malformed;
  RekeyAck ack;
  ack.uav = node_id(r.u16());
  ack.epoch = r.u32();
  if (!r.at_end()) return Errc::Malformed;
  return ack;
}

Status KeyRing::install(const BroadcastKey& key, SimTime now, SimDuration grace_window) {
  if (current_ && key.epoch <= current_->epoch) return Errc::StaleEpoch;
  previous_ = current_;
  current_ = key;
  grace_until_ = now + grace_window;
  return ok();
}

Result<crypto::SymmetricKey> KeyRing::key_for_epoch(std::uint32_t epoch, SimTime now) const {
  if (current_ && current_->epoch == epoch) return current_->key;
  if (previous_ && previous_->epoch == epoch && now <= grace_until_) return previous_->key;
  return Errc::UnknownEpoch;
}

Result<RekeyMessage> wrap_for(const handshake::SessionTable& sessions, NodeId gcs, NodeId uav,
                              const BroadcastKey& bkey, Rng& rng) {
  const auto* session = sessions.session(uav);
  if (session == nullptr) return Errc::NoSession;
  RekeyMessage msg;
  msg.gcs = gcs;
  msg.uav = uav;
  msg.nonce = rng.array<crypto::kNonceSize>();
  msg.box = crypto::aead_seal(session->key, msg.nonce, rekey_plaintext(bkey), rekey_aad(gcs, uav));
  return msg;
}

Result<BroadcastKey> open_rekey(const crypto::SymmetricKey& my_session_key, const RekeyMessage& msg) {
  auto plain = crypto::aead_open(my_session_key, msg.nonce, msg.box, rekey_aad(msg.gcs, msg.uav));
  if (!plain) return plain.error();
  if (plain->size() != kRekeyPlaintextSize) return Errc::Malformed;

  ByteReader r(*plain);
  BroadcastKey key;
  key.epoch = r.u32();
  key.key.bytes = r.array<crypto::kKeySize>();
  key.key.purpose = crypto::KeyPurpose::Broadcast;
  key.not_after = SimTime(static_cast<std::int64_t>(r.u64()));
  return key;
}

Result<std::uint32_t> unwrap(const crypto::SymmetricKey& my_session_key, const RekeyMessage& msg,
                             KeyRing& keyring, SimTime now, SimDuration grace_window) {
  auto key = open_rekey(my_session_key, msg);
  if (!key) return key.error();
  auto installed = keyring.install(*key, now, grace_window);
  if (!installed) return installed.error();
  return key->epoch;
}

std::optional<Rotation> rotate_if_expired(GcsKeyState& state, const handshake::SessionTable& sessions,
                                          SimTime now, Rng& rng) {
  if (state.current && now < state.current->not_after) return std::nullopt;

  Rotation rotation;
  rotation.key = new_epoch(state.current ? state.current->epoch : 0, rng, now, state.key_lifetime);
  for (const auto& [uav, session] : sessions.sessions()) {
    auto msg = wrap_for(sessions, state.gcs, uav, rotation.key, rng);
    if (msg) rotation.rekeys.push_back(std::move(*msg));
  }
  state.current = rotation.key;
  return rotation;
}

}  // namespace swarmlink::bkeys
