#pragma once

// Telemetry framing and the sealed mesh packet.
//
// Wire layout (big-endian):
//   version(1)=0x01 ‖ epoch(4) ‖ origin(2) ‖ seq(4) ‖ hop_limit(1) ‖ counter(6)
//   ‖ ciphertext ‖ tag(16)
// nonce = epoch ‖ origin ‖ counter; aad = version ‖ epoch ‖ origin ‖ seq ‖ counter.
// hop_limit stays out of the aad so forwarders can decrement it.

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "swarmlink/broadcast_keys.hpp"
#include "swarmlink/crypto.hpp"
#include "swarmlink/result.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::codec {

inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 18;
inline constexpr std::size_t kPacketOverhead = kHeaderSize + crypto::kTagSize;
inline constexpr std::size_t kMaxPayload = 255;
inline constexpr std::size_t kMessageOverhead = 4;  // msg_id, source, len
inline constexpr std::uint64_t kCounterLimit = 1ULL << 48;
/// Epoch 0 marks packets sealed under a pairwise session key (star mode).
inline constexpr std::uint32_t kSessionEpoch = 0;

struct TelemetryMessage {
  std::uint8_t msg_id = 0;
  NodeId source{};
  Bytes payload;

  std::size_t serialized_size() const noexcept { return kMessageOverhead + payload.size(); }
  friend bool operator==(const TelemetryMessage&, const TelemetryMessage&) = default;
};

struct Frame {
  std::vector<TelemetryMessage> messages;

  std::size_t serialized_size() const noexcept;
  /// count(1) ‖ repeated(msg_id(1) ‖ source(2) ‖ len(1) ‖ payload)
  Bytes serialize() const;
  static Result<Frame> parse(ByteView data);

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Greedy packing in input order: a message joins the open frame when it fits,
/// otherwise it starts the next frame. Frame capacity is mtu - 34 bytes.
Result<std::vector<Frame>> compose_frames(std::span<const TelemetryMessage> messages,
                                          std::size_t mtu);

struct PacketHeader {
  std::uint8_t version = kVersion;
  std::uint32_t epoch = 0;
  NodeId origin{};
  std::uint32_t seq = 0;
  std::uint8_t hop_limit = 0;
  std::uint64_t counter = 0;  // 48 bits on the wire

  friend bool operator==(const PacketHeader&, const PacketHeader&) = default;
};

struct WirePacket {
  PacketHeader header;
  Bytes ciphertext;
  crypto::Tag tag{};

  crypto::Nonce nonce() const;
  Bytes aad() const;
  Bytes encode() const;
  static Result<WirePacket> decode(ByteView wire);

  friend bool operator==(const WirePacket&, const WirePacket&) = default;
};

/// Per-node nonce counters, one independent series per epoch.
class CounterState {
 public:
  Result<std::uint64_t> next(std::uint32_t epoch);
  std::uint64_t peek(std::uint32_t epoch) const;
  void set_next(std::uint32_t epoch, std::uint64_t value) { next_[epoch] = value; }

 private:
  std::map<std::uint32_t, std::uint64_t> next_;
};

/// 64-packet sliding window per (origin, epoch).
class ReplayWindow {
 public:
  static constexpr std::uint64_t kWidth = 64;

  Status check(NodeId origin, std::uint32_t epoch, std::uint64_t counter) const;
  /// Records an authenticated counter. Call only after check() passed.
  void commit(NodeId origin, std::uint32_t epoch, std::uint64_t counter);
  /// Drops state for epochs below `min_epoch` (session epoch 0 is kept).
  void prune_below(std::uint32_t min_epoch);

 private:
  struct Slot {
    std::uint64_t highest = 0;
    std::uint64_t bitmap = 0;  // bit i set: highest - i seen
  };
  std::map<std::pair<NodeId, std::uint32_t>, Slot> slots_;
};

Result<WirePacket> seal_with_key(const crypto::SymmetricKey& key, std::uint32_t epoch, NodeId origin,
                                 std::uint32_t seq, std::uint8_t hop_limit, const Frame& frame,
                                 CounterState& counters);

Result<Frame> open_with_key(const crypto::SymmetricKey& key, ReplayWindow& window,
                            const WirePacket& packet);

/// Seals under the keyring's current broadcast epoch.
Result<WirePacket> seal_packet(const bkeys::KeyRing& keyring, NodeId origin, std::uint32_t seq,
                               std::uint8_t hop_limit, const Frame& frame, CounterState& counters);

Result<Frame> open_packet(const bkeys::KeyRing& keyring, ReplayWindow& window,
                          const WirePacket& packet, SimTime now);

/// Unencrypted baseline: ciphertext carries the frame verbatim, tag is zero.
/// Used only by scenarios that disable encryption for comparison.
Result<WirePacket> seal_cleartext(std::uint32_t epoch, NodeId origin, std::uint32_t seq,
                                  std::uint8_t hop_limit, const Frame& frame, CounterState& counters);
Result<Frame> open_cleartext(ReplayWindow& window, const WirePacket& packet);

}  // namespace swarmlink::codec
