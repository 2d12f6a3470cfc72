#pragma once

// Deterministic discrete-event simulation of a swarm run. One call, one
// single-threaded event loop, no shared state: independent runs may execute
// in parallel.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmlink/adversary.hpp"
#include "swarmlink/scenario.hpp"

namespace swarmlink::sim {

struct PairMetrics {
  NodeId from{};
  NodeId to{};
  std::uint64_t offered = 0;    // frames the origin's application produced
  std::uint64_t delivered = 0;  // of those, delivered at `to`
  std::optional<double> delivery_ratio;
};

struct LatencyStats {
  std::uint64_t samples = 0;
  std::optional<double> mean_s;
  std::optional<double> p95_s;
};

struct SecurityCounters {
  std::uint64_t auth_error = 0;
  std::uint64_t replay_error = 0;
  std::uint64_t signature_error = 0;
  std::uint64_t stale_epoch = 0;
  std::uint64_t unknown_epoch = 0;
  std::uint64_t malformed = 0;
  std::uint64_t unknown_handshake = 0;
  std::uint64_t duplicates_suppressed = 0;  // benign flood copies dropped by dedup
  std::uint64_t duplicate_deliveries = 0;   // a frame handed to an application twice
};

struct OverheadBytes {
  std::uint64_t handshake = 0;
  std::uint64_t rekey = 0;  // rekeys plus acks
  std::uint64_t control = 0;
  std::uint64_t data_wire = 0;  // every data transmission, forwards included
  std::uint64_t payload = 0;    // application payload originated
  std::optional<double> control_per_payload;
};

struct HandshakeMetrics {
  std::uint64_t attempts = 0;
  std::uint64_t sessions_established = 0;
  std::vector<NodeId> unreachable;
};

struct KeyMetrics {
  std::uint32_t gcs_epoch = 0;
  std::uint64_t rotations = 0;
  std::uint64_t rekeys_sent = 0;
  std::uint64_t rekey_retransmissions = 0;
  std::uint64_t acks_received = 0;
  std::optional<std::uint32_t> min_uav_epoch;  // over UAVs up at the end
};

struct DutyMetrics {
  std::string link;
  double airtime_s = 0;
  double max_window_airtime_s = 0;
  double budget_s = 0;
  double utilization = 0;  // max window airtime / budget
  std::uint64_t deferrals = 0;
};

struct NodeMetrics {
  NodeId id{};
  Role role = Role::Uav;
  bool up_at_end = false;
  std::uint32_t epoch = 0;
  bool has_session = false;
  std::uint64_t frames_offered = 0;
  std::uint64_t send_failures = 0;
  std::uint64_t transmissions = 0;
  std::map<std::string, std::uint64_t> transmissions_by_link;
  std::vector<DutyMetrics> duty;
  std::uint64_t link_switches = 0;
  std::optional<std::string> active_link;
};

struct MitmScore {
  std::uint64_t attempts = 0;
  std::uint64_t signature_errors = 0;
  std::uint64_t sessions_compromised = 0;
};

struct ReplayScore {
  std::uint64_t recorded = 0;
  std::uint64_t injected = 0;
  std::uint64_t receptions = 0;
  std::uint64_t rejected_duplicate = 0;
  std::uint64_t rejected_window = 0;
  std::uint64_t rejected_unknown_epoch = 0;
  std::uint64_t rejected_other = 0;
  std::uint64_t accepted_first_copy = 0;  // authentic packet the receiver had never seen
  std::uint64_t duplicate_deliveries = 0;
};

struct EavesdropScore {
  std::vector<std::uint32_t> leaked_epochs;
  std::uint64_t frames_observed = 0;
  std::uint64_t frames_recovered = 0;
  std::uint64_t recovered_unleaked = 0;
  std::map<std::uint32_t, std::uint64_t> recovered_by_epoch;
  std::optional<std::uint32_t> max_observed_epoch;
};

struct AdversaryOutcome {
  AdversaryKind kind = AdversaryKind::Eavesdrop;
  std::optional<NodeId> target;
  std::optional<MitmScore> mitm;
  std::optional<ReplayScore> replay;
  std::optional<EavesdropScore> eavesdrop;
};

struct Conservation {
  std::uint64_t tx_enqueued = 0;
  std::uint64_t tx_sent = 0;
  std::uint64_t tx_queued_at_end = 0;
  std::uint64_t tx_dropped_node_down = 0;
  std::uint64_t tx_dropped_oversize = 0;
  std::uint64_t tx_duty_deferrals = 0;
  std::int64_t switch_losses = 0;  // enqueued minus every accounted outcome

  std::uint64_t rx_candidates = 0;  // (transmission, other node) pairs
  std::uint64_t rx_out_of_range = 0;
  std::uint64_t rx_loss_dropped = 0;
  std::uint64_t rx_injected = 0;  // adversary transmissions reaching a node
  std::uint64_t rx_scheduled = 0;
  std::uint64_t rx_processed = 0;
  std::uint64_t rx_receiver_down = 0;
  std::uint64_t rx_in_flight_at_end = 0;

  bool balanced = false;
};

struct Audits {
  std::uint64_t nonce_reuse = 0;
  std::uint64_t clock_violations = 0;
  std::uint64_t duty_violations = 0;
  std::uint64_t epoch_regressions = 0;
  bool passed = false;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string mode;
  double duration_s = 0;
  bool encryption = true;
  std::uint64_t events_processed = 0;

  std::optional<double> delivery_ratio;
  std::optional<double> uav_to_uav_delivery_ratio;
  std::vector<PairMetrics> pairs;
  LatencyStats latency;
  LatencyStats uav_to_uav_latency;

  OverheadBytes overhead;
  SecurityCounters security;
  HandshakeMetrics handshake;
  KeyMetrics keys;
  std::vector<NodeMetrics> nodes;
  std::vector<AdversaryOutcome> adversaries;
  Conservation conservation;
  Audits audits;
  std::uint64_t link_switches = 0;
};

/// Per-frame ground truth kept for oracle comparisons.
struct FrameTrace {
  SimTime created{};
  std::map<NodeId, std::uint32_t> deliveries;  // receiver -> times delivered
  std::uint64_t transmissions = 0;             // data transmissions carrying this frame
};

struct RunOptions {
  bool trace = true;
};

struct RunResult {
  MetricsReport report;
  std::string trace;  // newline-delimited JSON records
  std::map<adversary::FrameKey, FrameTrace> frames;
};

/// Throws ValidationError when the scenario is invalid.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

std::string report_to_json(const MetricsReport& report);
/// One row per ordered node pair.
std::string report_to_csv(const MetricsReport& report);

}  // namespace swarmlink::sim
