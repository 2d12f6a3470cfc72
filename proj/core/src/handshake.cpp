#include "swarmlink/handshake.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "swarmlink/bytes.hpp"

namespace swarmlink::handshake {

bool SwarmRoster::contains(NodeId id) const { return id == gcs_id || is_uav(id); }

bool SwarmRoster::is_uav(NodeId id) const {
  return std::find(uav_ids.begin(), uav_ids.end(), id) != uav_ids.end();
}

std::optional<crypto::VerifyKey> SwarmRoster::key_of(NodeId id) const {
  if (!contains(id)) return std::nullopt;
  auto it = sig_pubkeys.find(id);
  if (it == sig_pubkeys.end()) return std::nullopt;
  return it->second;
}

void SwarmRoster::validate() const {
  if (uav_ids.empty()) throw std::invalid_argument("roster: at least one UAV required");
  if (is_uav(gcs_id)) throw std::invalid_argument("roster: gcs_id must not be a UAV id");
  auto sorted = uav_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("roster: duplicate UAV id");
  }
  if (!sig_pubkeys.contains(gcs_id)) throw std::invalid_argument("roster: missing GCS verification key");
  for (auto id : uav_ids) {
    if (!sig_pubkeys.contains(id)) {
      throw std::invalid_argument("roster: missing verification key for UAV " +
                                  std::to_string(raw(id)));
    }
  }
}

Bytes signed_payload(NodeId sender, NodeId recipient, const crypto::PublicPoint& ephemeral_pub,
                     const HandshakeNonce& nonce) {
  ByteWriter w(2 + 2 + ephemeral_pub.size() + nonce.size());
  w.u16(raw(sender)).u16(raw(recipient)).bytes(ephemeral_pub).bytes(nonce);
  return std::move(w).take();
}

Bytes session_context(NodeId gcs, NodeId uav, const HandshakeNonce& nonce) {
  ByteWriter w;
  w.str("swarmlink-v1|")
      .str(std::to_string(raw(gcs)))
      .str("|")
      .str(std::to_string(raw(uav)))
      .str("|")
      .bytes(nonce);
  return std::move(w).take();
}

namespace {

template <typename Msg>
Bytes encode_message(MsgType type, const Msg& m) {
  ByteWriter w(kWireSize);
  w.u8(static_cast<std::uint8_t>(type))
      .u16(raw(m.sender))
      .u16(raw(m.recipient))
      .bytes(m.ephemeral_pub)
      .bytes(m.nonce)
      .bytes(m.signature);
  return std::move(w).take();
}

template <typename Msg>
Result<Msg> decode_message(MsgType type, ByteView wire) {
  if (wire.size() != kWireSize) return Errc::Malformed;
  ByteReader r(wire);
  if (r.u8() != static_cast<std::uint8_t>(type)) return Errc::Malformed;
  Msg m;
  m.sender = node_id(r.u16());
  m.recipient = node_id(r.u16());
  m.ephemeral_pub = r.array<crypto::kPointSize>();
  m.nonce = r.array<16>();
  m.signature = r.array<crypto::kSignatureSize>();
  if (!r.at_end()) return Errc::Malformed;
  return m;
}

}  // namespace

Bytes encode(const KeyOffer& offer) { return encode_message(MsgType::KeyOffer, offer); }
Bytes encode(const KeyResponse& response) { return encode_message(MsgType::KeyResponse, response); }

Result<KeyOffer> decode_offer(ByteView wire) {
  return decode_message<KeyOffer>(MsgType::KeyOffer, wire);
}
Result<KeyResponse> decode_response(ByteView wire) {
  return decode_message<KeyResponse>(MsgType::KeyResponse, wire);
}

const Session* SessionTable::session(NodeId uav) const {
  auto it = established_.find(uav);
  return it == established_.end() ? nullptr : &it->second;
}

void SessionTable::install(NodeId uav, Session s) { established_[uav] = s; }

void SessionTable::drop_session(NodeId uav) { established_.erase(uav); }

const PendingHandshake* SessionTable::pending(const HandshakeNonce& nonce) const {
  auto it = pending_.find(nonce);
  return it == pending_.end() ? nullptr : &it->second;
}

bool SessionTable::has_pending_for(NodeId uav) const {
  return std::any_of(pending_.begin(), pending_.end(),
                     [uav](const auto& kv) { return kv.second.uav == uav; });
}

void SessionTable::add_pending(const HandshakeNonce& nonce, PendingHandshake p) {
  pending_.emplace(nonce, std::move(p));
}

void SessionTable::remove_pending(const HandshakeNonce& nonce) { pending_.erase(nonce); }

std::vector<NodeId> SessionTable::expire(SimTime now) {
  std::vector<NodeId> expired;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.deadline < now) {
      expired.push_back(it->second.uav);
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  return expired;
}

Result<KeyOffer> gcs_start_handshake(SessionTable& table, const SwarmRoster& roster,
                                     const crypto::SignatureKeyPair& gcs_key, NodeId uav,
                                     Rng& rng, SimTime now, SimDuration timeout) {
  if (!roster.is_uav(uav)) return Errc::UnknownNode;

  HandshakeNonce nonce;
  do {
    nonce = rng.array<16>();
  } while (table.pending(nonce) != nullptr);

  auto ephemeral = crypto::agreement_keypair_from_seed(rng.array<32>());

  KeyOffer offer;
  offer.sender = roster.gcs_id;
  offer.recipient = uav;
  offer.ephemeral_pub = ephemeral.public_point;
  offer.nonce = nonce;
  offer.signature = crypto::sign(gcs_key, signed_payload(offer.sender, offer.recipient,
                                                         offer.ephemeral_pub, offer.nonce));

  table.add_pending(nonce, PendingHandshake{uav, ephemeral, now + timeout});
  return offer;
}

Result<UavAccept> uav_on_offer(const SwarmRoster& roster, NodeId my_id,
                               const crypto::SignatureKeyPair& my_key, const KeyOffer& offer,
                               Rng& rng, bool verify_signatures) {
  if (offer.recipient != my_id || !roster.is_uav(my_id)) return Errc::UnknownNode;
  if (offer.sender != roster.gcs_id) return Errc::UnknownNode;
  auto gcs_pub = roster.key_of(roster.gcs_id);
  if (!gcs_pub) return Errc::UnknownNode;

  if (verify_signatures &&
      !crypto::verify(*gcs_pub,
                      signed_payload(offer.sender, offer.recipient, offer.ephemeral_pub, offer.nonce),
                      offer.signature)) {
    return Errc::SignatureError;
  }

  auto ephemeral = crypto::agreement_keypair_from_seed(rng.array<32>());
  auto secret = crypto::ecdh_shared_secret(ephemeral.private_scalar, offer.ephemeral_pub);
  if (!secret) return secret.error();
  auto key = crypto::derive_key(*secret, session_context(roster.gcs_id, my_id, offer.nonce));
  if (!key) return key.error();

  KeyResponse response;
  response.sender = my_id;
  response.recipient = roster.gcs_id;
  response.ephemeral_pub = ephemeral.public_point;
  response.nonce = offer.nonce;
  response.signature = crypto::sign(my_key, signed_payload(response.sender, response.recipient,
                                                           response.ephemeral_pub, response.nonce));
  return UavAccept{response, *key};
}

Result<crypto::SymmetricKey> gcs_on_response(SessionTable& table, const SwarmRoster& roster,
                                             const KeyResponse& response, SimTime now,
                                             bool verify_signatures) {
  if (!roster.is_uav(response.sender) || response.recipient != roster.gcs_id) {
    return Errc::UnknownNode;
  }
  const PendingHandshake* pending = table.pending(response.nonce);
  if (pending == nullptr || pending->uav != response.sender) return Errc::UnknownHandshake;
  if (now > pending->deadline) {
    table.remove_pending(response.nonce);
    return Errc::Expired;
  }

  auto uav_pub = roster.key_of(response.sender);
  if (!uav_pub) return Errc::UnknownNode;
  if (verify_signatures &&
      !crypto::verify(*uav_pub,
                      signed_payload(response.sender, response.recipient, response.ephemeral_pub,
                                     response.nonce),
                      response.signature)) {
    return Errc::SignatureError;
  }

  auto secret = crypto::ecdh_shared_secret(pending->ephemeral.private_scalar, response.ephemeral_pub);
  if (!secret) return secret.error();
  auto key = crypto::derive_key(*secret, session_context(roster.gcs_id, response.sender,
                                                         response.nonce));
  if (!key) return key.error();

  table.install(response.sender, Session{*key, now});
  table.remove_pending(response.nonce);
  return *key;
}

std::vector<NodeId> expire_pending(SessionTable& table, SimTime now) { return table.expire(now); }

}  // namespace swarmlink::handshake
