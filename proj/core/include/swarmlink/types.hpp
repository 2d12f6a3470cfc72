#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace swarmlink {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

/// 16-bit node identifier as carried on the wire.
enum class NodeId : std::uint16_t {};

constexpr std::uint16_t raw(NodeId id) noexcept { return static_cast<std::uint16_t>(id); }
constexpr NodeId node_id(std::uint16_t v) noexcept { return static_cast<NodeId>(v); }

/// Simulated time since the start of a run. Integer nanoseconds keep event
/// ordering exact and platform independent.
using SimTime = std::chrono::nanoseconds;
using SimDuration = std::chrono::nanoseconds;

constexpr SimTime from_seconds(double s) noexcept {
  return SimTime(static_cast<std::int64_t>(s * 1e9 + (s >= 0 ? 0.5 : -0.5)));
}
constexpr double to_seconds(SimTime t) noexcept { return static_cast<double>(t.count()) * 1e-9; }

/// First byte of every control message on the wire. Data packets start with
/// their version byte (0x01) and never collide with these.
enum class MsgType : std::uint8_t {
  KeyOffer = 0x10,
  KeyResponse = 0x11,
  Rekey = 0x12,
  RekeyAck = 0x13,
};

}  // namespace swarmlink
