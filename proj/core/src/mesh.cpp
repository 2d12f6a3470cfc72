#include "swarmlink/mesh.hpp"

namespace swarmlink::mesh {

std::string_view to_string(TopologyMode mode) noexcept {
  return mode == TopologyMode::Mesh ? "mesh" : "star";
}

std::string_view to_string(RxStatus s) noexcept {
  switch (s) {
    case RxStatus::Delivered: return "delivered";
    case RxStatus::Duplicate: return "duplicate";
    case RxStatus::AuthError: return "auth_error";
    case RxStatus::ReplayError: return "replay_error";
    case RxStatus::UnknownEpoch: return "unknown_epoch";
    case RxStatus::Malformed: return "malformed";
  }
  return "malformed";
}

RxStatus status_from(Errc e) noexcept {
  switch (e) {
    case Errc::AuthError: return RxStatus::AuthError;
    case Errc::ReplayError: return RxStatus::ReplayError;
    case Errc::UnknownEpoch:
    case Errc::NoSession: return RxStatus::UnknownEpoch;
    default: return RxStatus::Malformed;
  }
}

bool DedupCache::insert(NodeId origin, std::uint32_t seq) {
  if (!entries_.insert({origin, seq}).second) return false;
  order_.emplace_back(origin, seq);
  while (order_.size() > capacity_) {
    entries_.erase(order_.front());
    order_.pop_front();
  }
  return true;
}

Result<codec::WirePacket> originate(NodeState& node, const codec::Frame& frame,
                                    std::uint8_t hop_limit) {
  Result<codec::WirePacket> packet = Errc::NoBroadcastKey;
  const std::uint32_t seq = node.next_seq;

  if (node.mode == TopologyMode::Mesh) {
    if (!node.keyring.current()) return Errc::NoBroadcastKey;
    packet = node.encryption
                 ? codec::seal_packet(node.keyring, node.id, seq, hop_limit, frame, node.counters)
                 : codec::seal_cleartext(node.keyring.current_epoch(), node.id, seq, hop_limit, frame,
                                         node.counters);
  } else {
    if (!node.session_key) return Errc::NoSession;
    packet = node.encryption
                 ? codec::seal_with_key(*node.session_key, codec::kSessionEpoch, node.id, seq, 0,
                                        frame, node.counters)
                 : codec::seal_cleartext(codec::kSessionEpoch, node.id, seq, 0, frame, node.counters);
  }
  if (!packet) return packet.error();

  ++node.next_seq;
  node.dedup.insert(node.id, seq);
  return packet;
}

namespace {

Result<crypto::SymmetricKey> rx_key(const NodeState& node, const codec::WirePacket& packet,
                                    SimTime now) {
  if (node.mode == TopologyMode::Star) {
    if (packet.header.epoch != codec::kSessionEpoch || !node.session_key) return Errc::UnknownEpoch;
    return *node.session_key;
  }
  return node.keyring.key_for_epoch(packet.header.epoch, now);
}

}  // namespace

RxOutcome handle_rx(NodeState& node, const codec::WirePacket& packet, SimTime now) {
  RxOutcome out;
  const auto& h = packet.header;

  Result<crypto::SymmetricKey> key = Errc::UnknownEpoch;
  if (node.encryption) {
    key = rx_key(node, packet, now);
    if (!key) {
      out.status = RxStatus::UnknownEpoch;
      return out;
    }
  }

  if (node.dedup.contains(h.origin, h.seq)) {
    out.status = RxStatus::Duplicate;
    return out;
  }

  auto frame = node.encryption ? codec::open_with_key(*key, node.replay, packet)
                               : codec::open_cleartext(node.replay, packet);
  if (!frame) {
    out.status = status_from(frame.error());
    return out;
  }

  node.dedup.insert(h.origin, h.seq);
  out.status = RxStatus::Delivered;
  out.deliver = std::move(*frame);
  if (node.mode == TopologyMode::Mesh && h.hop_limit > 0) {
    codec::WirePacket copy = packet;
    copy.header.hop_limit = static_cast<std::uint8_t>(h.hop_limit - 1);
    out.forward = std::move(copy);
  }
  return out;
}

namespace {

std::optional<Unicast> reseal_for(NodeState& gcs, StarRelay& relay, NodeId to,
                                  const crypto::SymmetricKey& key, const codec::PacketHeader& h,
                                  const codec::Frame& frame) {
  auto& counters = relay.downlink_counters[to];
  auto sealed = gcs.encryption
                    ? codec::seal_with_key(key, codec::kSessionEpoch, h.origin, h.seq, 0, frame, counters)
                    : codec::seal_cleartext(codec::kSessionEpoch, h.origin, h.seq, 0, frame, counters);
  if (!sealed) return std::nullopt;
  return Unicast{to, std::move(*sealed)};
}

}  // namespace

StarRelayOutcome star_forward(NodeState& gcs, StarRelay& relay,
                              const handshake::SessionTable& sessions,
                              const codec::WirePacket& packet) {
  StarRelayOutcome out;
  const auto& h = packet.header;
  const auto* sender = sessions.session(h.origin);
  if (h.epoch != codec::kSessionEpoch || sender == nullptr) {
    out.status = RxStatus::UnknownEpoch;
    return out;
  }
  if (gcs.dedup.contains(h.origin, h.seq)) {
    out.status = RxStatus::Duplicate;
    return out;
  }
  auto frame = gcs.encryption ? codec::open_with_key(sender->key, gcs.replay, packet)
                              : codec::open_cleartext(gcs.replay, packet);
  if (!frame) {
    out.status = status_from(frame.error());
    return out;
  }
  gcs.dedup.insert(h.origin, h.seq);
  out.status = RxStatus::Delivered;

  for (const auto& [uav, session] : sessions.sessions()) {
    if (uav == h.origin) continue;
    if (auto u = reseal_for(gcs, relay, uav, session.key, h, *frame)) out.relays.push_back(std::move(*u));
  }
  out.deliver = std::move(*frame);
  return out;
}

std::vector<Unicast> star_originate(NodeState& gcs, StarRelay& relay,
                                    const handshake::SessionTable& sessions,
                                    const codec::Frame& frame) {
  std::vector<Unicast> out;
  codec::PacketHeader h;
  h.origin = gcs.id;
  h.seq = gcs.next_seq++;
  gcs.dedup.insert(gcs.id, h.seq);
  for (const auto& [uav, session] : sessions.sessions()) {
    if (auto u = reseal_for(gcs, relay, uav, session.key, h, frame)) out.push_back(std::move(*u));
  }
  return out;
}

}  // namespace swarmlink::mesh
