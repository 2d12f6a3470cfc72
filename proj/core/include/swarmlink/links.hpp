#pragma once

// Simulated radio links: unit-disc connectivity, airtime/latency/loss, a
// sliding-window duty-cycle budget for sub-GHz, and health-based failover.

#include <chrono>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmlink/result.hpp"
#include "swarmlink/rng.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::links {

using namespace std::chrono_literals;

enum class Band { SubGHz, WiFi24, Cellular };

std::string_view to_string(Band b) noexcept;
std::optional<Band> band_from_string(std::string_view s) noexcept;

struct DutyCycle {
  double limit = 0.01;  // fraction of the window, (0, 1]
  SimDuration window = 3600s;

  /// limit × window, truncated to whole nanoseconds.
  SimDuration budget() const noexcept;
};

inline constexpr double kUnboundedRange = std::numeric_limits<double>::infinity();

struct LinkProfile {
  std::string name;
  Band band = Band::WiFi24;
  double range_m = 300.0;
  std::uint64_t bitrate_bps = 10'000'000;
  SimDuration base_latency = 2ms;
  double loss_prob = 0.0;
  std::optional<DutyCycle> duty;  // present iff band == SubGHz
  std::size_t mtu_bytes = 1500;

  /// Throws std::invalid_argument naming the field at fault.
  void validate() const;
};

LinkProfile default_subghz();
LinkProfile default_wifi24();
LinkProfile default_cellular();
std::vector<LinkProfile> default_profiles();

/// bytes × 8 / bitrate, rounded up to the next nanosecond.
SimDuration airtime(const LinkProfile& link, std::size_t bytes);

struct Position {
  double x = 0;
  double y = 0;
};

double distance(Position a, Position b) noexcept;

/// Closed disc: distance <= range_m. Cellular always connects.
bool in_range(Position a, Position b, const LinkProfile& link) noexcept;

struct AirtimeRecord {
  SimTime start{};
  SimDuration airtime{};
  SimTime end() const noexcept { return start + airtime; }
};

/// Enforces Σ airtime <= limit × window over every sliding window. Callers
/// must serialize transmissions (a radio sends one packet at a time).
class DutyCycleMeter {
 public:
  explicit DutyCycleMeter(DutyCycle duty) : duty_(duty) {}

  const DutyCycle& duty() const noexcept { return duty_; }

  /// Earliest start >= now at which `air` fits the budget; nullopt when a
  /// single transmission of this length can never fit.
  std::optional<SimTime> earliest_start(SimTime now, SimDuration air) const;
  bool admits(SimTime now, SimDuration air) const;
  void record(SimTime start, SimDuration air);

  /// Airtime overlapping [from, to].
  SimDuration usage(SimTime from, SimTime to) const;
  const std::deque<AirtimeRecord>& records() const noexcept { return records_; }

 private:
  void prune(SimTime now);

  DutyCycle duty_;
  std::deque<AirtimeRecord> records_;
};

/// Largest airtime inside any window of the given width. Records must be
/// sorted by start and non-overlapping, as a serialized radio produces them.
SimDuration max_window_airtime(std::span<const AirtimeRecord> records, SimDuration window);

struct Receiver {
  NodeId id{};
  double distance_m = 0;
};

struct Delivery {
  NodeId to{};
  SimTime arrival{};
};

struct TransmitResult {
  enum class Kind { Sent, Deferred };
  Kind kind = Kind::Sent;
  SimDuration airtime{};
  std::vector<Delivery> deliveries;
  std::vector<NodeId> lost;          // Bernoulli loss
  std::vector<NodeId> out_of_range;  // candidate receivers outside the disc
  SimTime deferred_until{};          // Deferred only

  bool sent() const noexcept { return kind == Kind::Sent; }
};

/// One transmission on `link`. Every in-range candidate receives it at
/// now + base_latency + airtime unless the loss draw drops it. A sub-GHz
/// transmission that would breach the duty budget is Deferred and nothing is
/// recorded. Receivers are processed (and loss draws made) in given order.
Result<TransmitResult> transmit(const LinkProfile& link, NodeId sender, std::size_t packet_bytes,
                                std::span<const Receiver> receivers, SimTime now, Rng& rng,
                                DutyCycleMeter* meter);

struct HealthPolicy {
  double alpha = 0.2;
  double threshold = 0.5;
  SimDuration hysteresis = 2s;
  /// A demoted link becomes eligible again after this long unused.
  SimDuration probe_interval = 10s;
  bool failover = true;
};

/// Per-node link choice. Preference: the highest-bitrate local (non-cellular)
/// link that is healthy and covers the destination, then cellular. When no
/// covering link is healthy the one with the best health estimate is used;
/// NoViableLink means nothing covers the destination at all.
class LinkSelector {
 public:
  LinkSelector(std::vector<LinkProfile> profiles, HealthPolicy policy);

  /// Index into profiles(). dest_distance_m is the unicast destination
  /// distance, or the nearest-neighbour distance for broadcasts.
  Result<std::size_t> select(double dest_distance_m, SimTime now);

  /// EWMA update with a delivery sample in [0, 1].
  void report(std::size_t link, double sample);

  const std::vector<LinkProfile>& profiles() const noexcept { return profiles_; }
  void update_profile(std::size_t i, const LinkProfile& p) { profiles_.at(i) = p; }
  std::optional<std::size_t> active() const noexcept { return active_; }
  double health(std::size_t link) const { return health_.at(link); }
  std::size_t switches() const noexcept { return switches_; }

 private:
  bool covers(std::size_t i, double d) const;
  bool healthy(std::size_t i) const { return health_[i] >= policy_.threshold; }

  std::vector<LinkProfile> profiles_;
  HealthPolicy policy_;
  std::vector<double> health_;
  std::vector<SimTime> last_used_;
  std::optional<std::size_t> active_;
  SimTime last_switch_{};
  std::size_t switches_ = 0;
};

}  // namespace swarmlink::links
