#include "swarmlink/codec.hpp"

#include "swarmlink/bytes.hpp"

namespace swarmlink::codec {

std::size_t Frame::serialized_size() const noexcept {
  std::size_t n = 1;
  for (const auto& m : messages) n += m.serialized_size();
  return n;
}

Bytes Frame::serialize() const {
  ByteWriter w(serialized_size());
  w.u8(static_cast<std::uint8_t>(messages.size()));
  for (const auto& m : messages) {
    w.u8(m.msg_id).u16(raw(m.source)).u8(static_cast<std::uint8_t>(m.payload.size())).bytes(m.payload);
  }
  return std::move(w).take();
}

Result<Frame> Frame::parse(ByteView data) {
  ByteReader r(data);
  const std::uint8_t count = r.u8();
  if (!r.ok()) return Errc::Malformed;
  Frame frame;
  frame.messages.reserve(count);
  for (std::uint8_t i = 0; i < count; ++i) {
    TelemetryMessage m;
    m.msg_id = r.u8();
    m.source = node_id(r.u16());
    const std::uint8_t len = r.u8();
    m.payload = r.bytes(len);
    if (!r.ok()) return Errc::Malformed;
    frame.messages.push_back(std::move(m));
  }
  if (!r.at_end()) return Errc::Malformed;
  return frame;
}

Result<std::vector<Frame>> compose_frames(std::span<const TelemetryMessage> messages,
                                          std::size_t mtu) {
  if (mtu <= kPacketOverhead) return Errc::MessageTooLarge;
  const std::size_t capacity = mtu - kPacketOverhead;

  std::vector<Frame> frames;
  Frame open;
  std::size_t used = 1;
  for (const auto& m : messages) {
    if (m.payload.size() > kMaxPayload || 1 + m.serialized_size() > capacity) {
      return Errc::MessageTooLarge;
    }
    if (!open.messages.empty() && (used + m.serialized_size() > capacity || open.messages.size() == 255)) {
      frames.push_back(std::move(open));
      open = Frame{};
      used = 1;
    }
    open.messages.push_back(m);
    used += m.serialized_size();
  }
  if (!open.messages.empty()) frames.push_back(std::move(open));
  return frames;
}

crypto::Nonce WirePacket::nonce() const {
  ByteWriter w(crypto::kNonceSize);
  w.u32(header.epoch).u16(raw(header.origin)).u48(header.counter);
  crypto::Nonce n{};
  std::copy(w.view().begin(), w.view().end(), n.begin());
  return n;
}

Bytes WirePacket::aad() const {
  ByteWriter w(17);
  w.u8(header.version).u32(header.epoch).u16(raw(header.origin)).u32(header.seq).u48(header.counter);
  return std::move(w).take();
}

Bytes WirePacket::encode() const {
  ByteWriter w(kHeaderSize + ciphertext.size() + crypto::kTagSize);
  w.u8(header.version)
      .u32(header.epoch)
      .u16(raw(header.origin))
      .u32(header.seq)
      .u8(header.hop_limit)
      .u48(header.counter)
      .bytes(ciphertext)
      .bytes(tag);
  return std::move(w).take();
}

Result<WirePacket> WirePacket::decode(ByteView wire) {
  if (wire.size() < kPacketOverhead) return Errc::Malformed;
  ByteReader r(wire);
  WirePacket p;
  p.header.version = r.u8();
  if (p.header.version != kVersion) return Errc::Malformed;
  p.header.epoch = r.u32();
  p.header.origin = node_id(r.u16());
  p.header.seq = r.u32();
  p.header.hop_limit = r.u8();
  p.header.counter = r.u48();
  p.ciphertext = r.bytes(r.remaining() - crypto::kTagSize);
  p.tag = r.array<crypto::kTagSize>();
  if (!r.at_end()) return Errc::Malformed;
  return p;
}

Result<std::uint64_t> CounterState::next(std::uint32_t epoch) {
  auto& n = next_[epoch];
  if (n >= kCounterLimit) return Errc::CounterExhausted;
  return n++;
}

std::uint64_t CounterState::peek(std::uint32_t epoch) const {
  auto it = next_.find(epoch);
  return it == next_.end() ? 0 : it->second;
}

Status ReplayWindow::check(NodeId origin, std::uint32_t epoch, std::uint64_t counter) const {
  auto it = slots_.find({origin, epoch});
  if (it == slots_.end()) return ok();
  const Slot& s = it->second;
  if (counter > s.highest) return ok();
  const std::uint64_t age = s.highest - counter;
  if (age >= kWidth) return Errc::ReplayError;
  if (s.bitmap & (1ULL << age)) return Errc::ReplayError;
  return ok();
}

void ReplayWindow::commit(NodeId origin, std::uint32_t epoch, std::uint64_t counter) {
  auto [it, inserted] = slots_.try_emplace({origin, epoch});
  Slot& s = it->second;
  if (inserted) {
    s.highest = counter;
    s.bitmap = 1;
    return;
  }
  if (counter > s.highest) {
    const std::uint64_t shift = counter - s.highest;
    s.bitmap = shift >= kWidth ? 0 : s.bitmap << shift;
    s.bitmap |= 1;
    s.highest = counter;
  } else {
    s.bitmap |= 1ULL << (s.highest - counter);
  }
}

void ReplayWindow::prune_below(std::uint32_t min_epoch) {
  for (auto it = slots_.begin(); it != slots_.end();) {
    const auto epoch = it->first.second;
    if (epoch != kSessionEpoch && epoch < min_epoch) {
      it = slots_.erase(it);
    } else {
      ++it;
    }
  }
}

namespace {

Result<PacketHeader> next_header(std::uint32_t epoch, NodeId origin, std::uint32_t seq,
                                 std::uint8_t hop_limit, CounterState& counters) {
  auto counter = counters.next(epoch);
  if (!counter) return counter.error();
  PacketHeader h;
  h.epoch = epoch;
  h.origin = origin;
  h.seq = seq;
  h.hop_limit = hop_limit;
  h.counter = *counter;
  return h;
}

}  // namespace

Result<WirePacket> seal_with_key(const crypto::SymmetricKey& key, std::uint32_t epoch, NodeId origin,
                                 std::uint32_t seq, std::uint8_t hop_limit, const Frame& frame,
                                 CounterState& counters) {
  auto header = next_header(epoch, origin, seq, hop_limit, counters);
  if (!header) return header.error();
  WirePacket p;
  p.header = *header;
  auto box = crypto::aead_seal(key, p.nonce(), frame.serialize(), p.aad());
  p.ciphertext = std::move(box.ciphertext);
  p.tag = box.tag;
  return p;
}

Result<Frame> open_with_key(const crypto::SymmetricKey& key, ReplayWindow& window,
                            const WirePacket& packet) {
  const auto& h = packet.header;
  if (auto fresh = window.check(h.origin, h.epoch, h.counter); !fresh) return fresh.error();
  auto plain = crypto::aead_open(key, packet.nonce(), crypto::AeadBox{packet.ciphertext, packet.tag},
                                 packet.aad());
  if (!plain) return plain.error();
  auto frame = Frame::parse(*plain);
  if (!frame) return frame.error();
  window.commit(h.origin, h.epoch, h.counter);
  return frame;
}

Result<WirePacket> seal_packet(const bkeys::KeyRing& keyring, NodeId origin, std::uint32_t seq,
                               std::uint8_t hop_limit, const Frame& frame, CounterState& counters) {
  if (!keyring.current()) return Errc::NoBroadcastKey;
  const auto& current = *keyring.current();
  return seal_with_key(current.key, current.epoch, origin, seq, hop_limit, frame, counters);
}

Result<Frame> open_packet(const bkeys::KeyRing& keyring, ReplayWindow& window,
                          const WirePacket& packet, SimTime now) {
  auto key = keyring.key_for_epoch(packet.header.epoch, now);
  if (!key) return key.error();
  return open_with_key(*key, window, packet);
}

Result<WirePacket> seal_cleartext(std::uint32_t epoch, NodeId origin, std::uint32_t seq,
                                  std::uint8_t hop_limit, const Frame& frame, CounterState& counters) {
  auto header = next_header(epoch, origin, seq, hop_limit, counters);
  if (!header) return header.error();
  WirePacket p;
  p.header = *header;
  p.ciphertext = frame.serialize();
  return p;
}

Result<Frame> open_cleartext(ReplayWindow& window, const WirePacket& packet) {
  const auto& h = packet.header;
  if (auto fresh = window.check(h.origin, h.epoch, h.counter); !fresh) return fresh.error();
  auto frame = Frame::parse(packet.ciphertext);
  if (!frame) return frame.error();
  window.commit(h.origin, h.epoch, h.counter);
  return frame;
}

}  // namespace swarmlink::codec
