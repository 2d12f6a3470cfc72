#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmlink/links.hpp"
#include "swarmlink/mesh.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::sim {

using namespace std::chrono_literals;

enum class Role { Gcs, Uav };

struct Waypoint {
  SimTime at{};
  links::Position position;
};

struct NodeSpec {
  NodeId id{};
  Role role = Role::Uav;
  links::Position position;
  std::vector<Waypoint> waypoints;  // accepted and validated; positions stay static
  bool offline = false;
  std::optional<SimTime> fail_at;
};

struct ProtocolParams {
  SimDuration key_lifetime = 60s;
  SimDuration grace_window = 5s;
  SimDuration handshake_timeout = 5s;
  std::uint8_t hop_limit = mesh::kDefaultHopLimit;
  int handshake_retries = 3;
  SimDuration rekey_retransmit = 1s;
  std::size_t dedup_capacity = mesh::kDefaultDedupCapacity;
  SimDuration forward_jitter_max = 10ms;
  bool encryption = true;
  bool verify_signatures = true;
};

struct TrafficSpec {
  double uav_rate_hz = 1.0;
  double gcs_rate_hz = 0.0;
  std::size_t payload_min = 16;
  std::size_t payload_max = 64;
  std::size_t messages_min = 1;
  std::size_t messages_max = 3;
  SimTime start = 1s;
  std::optional<SimTime> stop;  // defaults to duration - 1 s
};

enum class AdversaryKind { Eavesdrop, MitmKeySubstitution, ReplayInjector };

std::string_view to_string(AdversaryKind k) noexcept;

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::Eavesdrop;
  std::optional<NodeId> target;  // nullopt: all nodes
  SimTime active_from{};
  std::optional<SimTime> active_until;

  // Eavesdrop: broadcast epochs whose keys the adversary is handed.
  std::vector<std::uint32_t> leaked_epochs;
  // MITM: re-sign substituted messages with a non-roster key instead of
  // leaving the signature stale.
  bool resign = false;
  bool substitute_offers = true;
  bool substitute_responses = true;
  // Replay
  SimDuration replay_delay = 50ms;
  std::size_t max_injections = 1000;
  double record_prob = 1.0;

  bool active_at(SimTime t) const noexcept {
    return t >= active_from && (!active_until || t <= *active_until);
  }
  bool targets(NodeId id) const noexcept { return !target || *target == id; }
};

struct LinkEvent {
  SimTime at{};
  std::string link;
  std::optional<double> loss_prob;
  std::optional<double> range_m;
};

/// Scripted loss of every transmission of one rekey.
struct RekeyDrop {
  NodeId uav{};
  std::uint32_t epoch = 0;
};

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 0;
  SimDuration duration = 30s;
  mesh::TopologyMode mode = mesh::TopologyMode::Mesh;
  std::vector<NodeSpec> nodes;
  std::vector<links::LinkProfile> links = links::default_profiles();
  links::HealthPolicy link_policy;
  std::vector<LinkEvent> link_events;
  ProtocolParams protocol;
  TrafficSpec traffic;
  std::vector<AdversarySpec> adversaries;
  std::vector<RekeyDrop> rekey_drops;

  const NodeSpec* find(NodeId id) const;
  NodeId gcs_id() const;
  SimTime traffic_stop() const;
};

/// Invalid scenario content. `path()` names the offending field, e.g.
/// "nodes[1].role".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Unreadable scenario file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Throws ValidationError on the first broken constraint.
void validate(const Scenario& scenario);

}  // namespace swarmlink::sim
