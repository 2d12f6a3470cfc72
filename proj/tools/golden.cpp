#include "golden.hpp"

#include "json.hpp"
#include "swarmlink/broadcast_keys.hpp"
#include "swarmlink/bytes.hpp"
#include "swarmlink/codec.hpp"
#include "swarmlink/handshake.hpp"

namespace swarmlink::tools {

namespace {

using ojson = nlohmann::ordered_json;

template <std::size_t N>
ByteArray<N> counting_bytes(std::uint8_t start) {
  ByteArray<N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<std::uint8_t>(start + i);
  return out;
}

codec::Frame sample_frame() {
  codec::Frame f;
  f.messages.push_back({0x00, node_id(3), to_bytes("HEARTBEAT")});
  f.messages.push_back({0x21, node_id(3), Bytes{0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08}});
  return f;
}

ojson packet_entry(const std::string& name, const codec::WirePacket& p, const codec::Frame& frame) {
  const auto& h = p.header;
  return ojson{{"name", name},
               {"epoch", h.epoch},
               {"origin", raw(h.origin)},
               {"seq", h.seq},
               {"hop_limit", h.hop_limit},
               {"counter", h.counter},
               {"frame_hex", to_hex(frame.serialize())},
               {"nonce_hex", to_hex(p.nonce())},
               {"aad_hex", to_hex(p.aad())},
               {"wire_hex", to_hex(p.encode())}};
}

}  // namespace

std::string golden_wire_samples() {
  crypto::SymmetricKey broadcast{counting_bytes<32>(0x00), crypto::KeyPurpose::Broadcast};
  crypto::SymmetricKey session{counting_bytes<32>(0x80), crypto::KeyPurpose::Session};
  const auto frame = sample_frame();

  ojson packets = ojson::array();
  {
    codec::CounterState counters;
    counters.set_next(7, 1);
    auto p = codec::seal_with_key(broadcast, 7, node_id(3), 42, 8, frame, counters);
    packets.push_back(packet_entry("mesh_epoch7", *p, frame));
  }
  {
    codec::CounterState counters;
    counters.set_next(0xFFFFFFFF, codec::kCounterLimit - 1);
    auto p = codec::seal_with_key(broadcast, 0xFFFFFFFF, node_id(0xFFFF), 0xFFFFFFFF, 0, frame, counters);
    packets.push_back(packet_entry("mesh_field_limits", *p, frame));
  }
  {
    codec::CounterState counters;
    auto p = codec::seal_with_key(session, codec::kSessionEpoch, node_id(3), 5, 0, frame, counters);
    packets.push_back(packet_entry("star_session", *p, frame));
  }
  {
    codec::CounterState counters;
    auto p = codec::seal_cleartext(2, node_id(3), 9, 4, frame, counters);
    packets.push_back(packet_entry("cleartext_baseline", *p, frame));
  }
  {
    codec::Frame empty;
    codec::CounterState counters;
    auto p = codec::seal_with_key(broadcast, 1, node_id(1), 0, 8, empty, counters);
    packets.push_back(packet_entry("empty_frame", *p, empty));
  }

  const auto gcs_key = crypto::signature_keypair_from_seed(counting_bytes<32>(0x40));
  const auto eph = crypto::agreement_keypair_from_seed(counting_bytes<32>(0x60));
  handshake::KeyOffer offer;
  offer.sender = node_id(0);
  offer.recipient = node_id(3);
  offer.ephemeral_pub = eph.public_point;
  offer.nonce = counting_bytes<16>(0xA0);
  offer.signature = crypto::sign(gcs_key, handshake::signed_payload(offer.sender, offer.recipient,
                                                                    offer.ephemeral_pub, offer.nonce));

  bkeys::BroadcastKey bkey{7, broadcast, SimTime(60'000'000'000)};
  // wrap_for draws its nonce from an rng, so the sample seals by hand.
  bkeys::RekeyMessage rekey;
  rekey.gcs = node_id(0);
  rekey.uav = node_id(3);
  rekey.nonce = counting_bytes<12>(0xC0);
  {
    ByteWriter w(44);
    w.u32(bkey.epoch).bytes(bkey.key.bytes).u64(static_cast<std::uint64_t>(bkey.not_after.count()));
    rekey.box = crypto::aead_seal(session, rekey.nonce, std::move(w).take(), bkeys::rekey_aad(rekey.gcs, rekey.uav));
  }

  ojson control = ojson::array();
  control.push_back(ojson{{"name", "key_offer"}, {"wire_hex", to_hex(handshake::encode(offer))}});
  control.push_back(ojson{{"name", "rekey_epoch7"}, {"wire_hex", to_hex(bkeys::encode(rekey))}});
  control.push_back(ojson{{"name", "rekey_ack_epoch7"},
                          {"wire_hex", to_hex(bkeys::encode(bkeys::RekeyAck{node_id(3), 7}))}});

  ojson doc;
  doc["format"] = "swarmlink-wire-samples/1";
  doc["broadcast_key_hex"] = to_hex(broadcast.bytes);
  doc["session_key_hex"] = to_hex(session.bytes);
  doc["packets"] = std::move(packets);
  doc["control"] = std::move(control);
  return doc.dump(2) + "\n";
}

}  // namespace swarmlink::tools
