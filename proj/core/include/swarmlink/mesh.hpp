#pragma once

// Dissemination: flooding with duplicate suppression and hop limits (mesh
// mode) or GCS relaying under pairwise keys (star mode).

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "swarmlink/broadcast_keys.hpp"
#include "swarmlink/codec.hpp"
#include "swarmlink/handshake.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::mesh {

enum class TopologyMode { Mesh, Star };

std::string_view to_string(TopologyMode mode) noexcept;

inline constexpr std::uint8_t kDefaultHopLimit = 8;
inline constexpr std::size_t kDefaultDedupCapacity = 1024;

/// Bounded set of (origin, seq) with FIFO eviction.
class DedupCache {
 public:
  explicit DedupCache(std::size_t capacity = kDefaultDedupCapacity) : capacity_(capacity) {}

  bool contains(NodeId origin, std::uint32_t seq) const { return entries_.contains({origin, seq}); }
  /// False when already present.
  bool insert(NodeId origin, std::uint32_t seq);
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::set<std::pair<NodeId, std::uint32_t>> entries_;
  std::deque<std::pair<NodeId, std::uint32_t>> order_;
};

struct NodeState {
  NodeId id{};
  TopologyMode mode = TopologyMode::Mesh;
  bool encryption = true;

  bkeys::KeyRing keyring;                          // broadcast key (mesh)
  std::optional<crypto::SymmetricKey> session_key;  // UAV side of its GCS session (star)
  codec::CounterState counters;
  codec::ReplayWindow replay;
  DedupCache dedup;
  std::uint32_t next_seq = 0;

  explicit NodeState(NodeId node, TopologyMode m = TopologyMode::Mesh,
                     std::size_t dedup_capacity = kDefaultDedupCapacity)
      : id(node), mode(m), dedup(dedup_capacity) {}
};

/// Seals a locally originated frame and records it in the dedup cache.
/// Mesh nodes need a broadcast key (NoBroadcastKey); star UAVs need their
/// session key (NoSession). Star packets always carry hop_limit 0.
Result<codec::WirePacket> originate(NodeState& node, const codec::Frame& frame,
                                    std::uint8_t hop_limit = kDefaultHopLimit);

enum class RxStatus { Delivered, Duplicate, AuthError, ReplayError, UnknownEpoch, Malformed };

std::string_view to_string(RxStatus s) noexcept;
RxStatus status_from(Errc e) noexcept;

struct RxOutcome {
  RxStatus status = RxStatus::Malformed;
  std::optional<codec::Frame> deliver;
  std::optional<codec::WirePacket> forward;
};

/// Receive path: epoch key lookup, then dedup, then authentication and replay
/// check. A successful packet is cached before a forward copy with
/// hop_limit - 1 is produced; failures are neither delivered nor forwarded.
RxOutcome handle_rx(NodeState& node, const codec::WirePacket& packet, SimTime now);

struct Unicast {
  NodeId to{};
  codec::WirePacket packet;
};

/// GCS-side star state: one nonce counter series per downlink session.
struct StarRelay {
  std::map<NodeId, codec::CounterState> downlink_counters;
};

struct StarRelayOutcome {
  RxStatus status = RxStatus::Malformed;
  std::optional<codec::Frame> deliver;  // GCS-local delivery
  std::vector<Unicast> relays;
};

/// Opens an uplink under the sender's session key and re-seals it for every
/// other sessioned UAV, keeping origin and seq so receivers can dedup.
StarRelayOutcome star_forward(NodeState& gcs, StarRelay& relay,
                              const handshake::SessionTable& sessions,
                              const codec::WirePacket& packet);

/// GCS-originated star traffic, sealed once per sessioned UAV.
std::vector<Unicast> star_originate(NodeState& gcs, StarRelay& relay,
                                    const handshake::SessionTable& sessions,
                                    const codec::Frame& frame);

}  // namespace swarmlink::mesh
