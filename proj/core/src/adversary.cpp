#include "swarmlink/adversary.hpp"

#include "swarmlink/codec.hpp"

namespace swarmlink::adversary {

MitmIdentity MitmIdentity::generate(Rng& rng) {
  MitmIdentity id;
  id.ephemeral = crypto::agreement_keypair_from_seed(rng.array<32>());
  id.rogue_signer = crypto::signature_keypair_from_seed(rng.array<32>());
  return id;
}

handshake::KeyOffer mitm_substitute(const handshake::KeyOffer& offer, const MitmIdentity& id,
                                    bool resign) {
  handshake::KeyOffer out = offer;
  out.ephemeral_pub = id.ephemeral.public_point;
  if (resign) {
    out.signature = crypto::sign(
        id.rogue_signer, handshake::signed_payload(out.sender, out.recipient, out.ephemeral_pub, out.nonce));
  }
  return out;
}

handshake::KeyResponse mitm_substitute(const handshake::KeyResponse& response,
                                       const MitmIdentity& id, bool resign) {
  handshake::KeyResponse out = response;
  out.ephemeral_pub = id.ephemeral.public_point;
  if (resign) {
    out.signature = crypto::sign(
        id.rogue_signer, handshake::signed_payload(out.sender, out.recipient, out.ephemeral_pub, out.nonce));
  }
  return out;
}

std::optional<crypto::SymmetricKey> mitm_candidate_key(const MitmIdentity& id, NodeId gcs, NodeId uav,
                                                       const handshake::HandshakeNonce& nonce,
                                                       const crypto::PublicPoint& victim_pub) {
  auto secret = crypto::ecdh_shared_secret(id.ephemeral.private_scalar, victim_pub);
  if (!secret) return std::nullopt;
  auto key = crypto::derive_key(*secret, handshake::session_context(gcs, uav, nonce));
  if (!key) return std::nullopt;
  return *key;
}

void MitmAttacker::observe(ByteView wire) {
  if (wire.empty()) return;
  const auto type = static_cast<MsgType>(wire[0]);
  if (type == MsgType::KeyOffer) {
    // A GCS that accepts a substituted response pairs its own ephemeral with ours.
    if (auto offer = handshake::decode_offer(wire)) {
      learn(mitm_candidate_key(id_, offer->sender, offer->recipient, offer->nonce, offer->ephemeral_pub));
    }
  } else if (type == MsgType::KeyResponse) {
    // A UAV that accepted a substituted offer pairs its ephemeral with ours.
    if (auto response = handshake::decode_response(wire)) {
      learn(mitm_candidate_key(id_, response->recipient, response->sender, response->nonce,
                               response->ephemeral_pub));
    }
  }
}

Bytes MitmAttacker::intercept(ByteView wire) {
  observe(wire);
  if (!wire.empty() && static_cast<MsgType>(wire[0]) == MsgType::KeyOffer) {
    if (auto offer = handshake::decode_offer(wire)) {
      ++attempts_;
      return handshake::encode(mitm_substitute(*offer, id_, resign_));
    }
  }
  if (!wire.empty() && static_cast<MsgType>(wire[0]) == MsgType::KeyResponse) {
    if (auto response = handshake::decode_response(wire)) {
      ++attempts_;
      return handshake::encode(mitm_substitute(*response, id_, resign_));
    }
  }
  return Bytes(wire.begin(), wire.end());
}

void MitmAttacker::learn(const std::optional<crypto::SymmetricKey>& key) {
  if (key) candidates_.insert(key->bytes);
}

EavesdropReport eavesdrop_collect(std::span<const Bytes> transmissions,
                                  const std::map<std::uint32_t, crypto::SymmetricKey>& leaked_keys,
                                  const std::map<FrameKey, Bytes>& ground_truth) {
  EavesdropReport report;
  std::set<FrameKey> observed;
  std::set<FrameKey> recovered;
  std::map<std::uint32_t, std::set<FrameKey>> observed_epoch;
  std::map<std::uint32_t, std::set<FrameKey>> recovered_epoch;

  for (const auto& wire : transmissions) {
    auto packet = codec::WirePacket::decode(wire);
    if (!packet) continue;
    const auto& h = packet->header;
    const FrameKey fk{h.origin, h.seq};
    observed.insert(fk);
    observed_epoch[h.epoch].insert(fk);

    auto truth = ground_truth.find(fk);
    if (truth == ground_truth.end()) continue;

    bool got = packet->ciphertext == truth->second;
    if (!got) {
      auto key = leaked_keys.find(h.epoch);
      if (key != leaked_keys.end()) {
        auto plain = crypto::aead_open(key->second, packet->nonce(),
                                       crypto::AeadBox{packet->ciphertext, packet->tag}, packet->aad());
        got = plain && *plain == truth->second;
      }
    }
    if (!got) continue;
    recovered.insert(fk);
    recovered_epoch[h.epoch].insert(fk);
  }

  report.frames_observed = observed.size();
  report.frames_recovered = recovered.size();
  for (const auto& [epoch, set] : observed_epoch) report.observed_by_epoch[epoch] = set.size();
  std::set<FrameKey> unleaked;
  for (const auto& [epoch, set] : recovered_epoch) {
    report.recovered_by_epoch[epoch] = set.size();
    if (!leaked_keys.contains(epoch)) unleaked.insert(set.begin(), set.end());
  }
  report.recovered_unleaked = unleaked.size();
  return report;
}

std::optional<Injection> ReplayInjector::observe(ByteView wire, NodeId sender, std::optional<NodeId> dest,
                                                 std::size_t link, SimTime now, Rng& rng) {
  if (recorded_ >= max_) return std::nullopt;
  if (!rng.bernoulli(record_prob_)) return std::nullopt;
  ++recorded_;
  return Injection{now + delay_, Bytes(wire.begin(), wire.end()), sender, dest, link};
}

}  // namespace swarmlink::adversary
