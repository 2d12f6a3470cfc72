#include "swarmlink/links.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace swarmlink::links {

std::string_view to_string(Band b) noexcept {
  switch (b) {
    case Band::SubGHz: return "subghz";
    case Band::WiFi24: return "wifi24";
    case Band::Cellular: return "cellular";
  }
  return "wifi24";
}

std::optional<Band> band_from_string(std::string_view s) noexcept {
  if (s == "subghz") return Band::SubGHz;
  if (s == "wifi24") return Band::WiFi24;
  if (s == "cellular") return Band::Cellular;
  return std::nullopt;
}

SimDuration DutyCycle::budget() const noexcept {
  return SimDuration(static_cast<std::int64_t>(limit * static_cast<double>(window.count())));
}

void LinkProfile::validate() const {
  auto bad = [this](const std::string& field, const std::string& why) {
    throw std::invalid_argument("link '" + name + "': " + field + " " + why);
  };
  if (name.empty()) bad("name", "must be non-empty");
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) bad("loss_prob", "must be in [0, 1]");
  if (bitrate_bps == 0) bad("bitrate_bps", "must be positive");
  if (base_latency.count() < 0) bad("base_latency_s", "must be non-negative");
  if (band != Band::Cellular && !(range_m >= 0.0)) bad("range_m", "must be non-negative");
  if (mtu_bytes == 0) bad("mtu_bytes", "must be positive");
  if (band == Band::SubGHz) {
    if (!duty) bad("duty_cycle_limit", "is required for subghz links");
    if (!(duty->limit > 0.0 && duty->limit <= 1.0)) bad("duty_cycle_limit", "must be in (0, 1]");
    if (duty->window.count() <= 0) bad("duty_cycle_window_s", "must be positive");
  } else if (duty) {
    bad("duty_cycle_limit", "is only allowed on subghz links");
  }
}

LinkProfile default_subghz() {
  LinkProfile p;
  p.name = "subghz";
  p.band = Band::SubGHz;
  p.range_m = 5000.0;
  p.bitrate_bps = 100'000;
  p.base_latency = 20ms;
  p.loss_prob = 0.02;
  p.duty = DutyCycle{0.01, 3600s};
  p.mtu_bytes = 256;
  return p;
}

LinkProfile default_wifi24() {
  LinkProfile p;
  p.name = "wifi24";
  p.band = Band::WiFi24;
  p.range_m = 300.0;
  p.bitrate_bps = 10'000'000;
  p.base_latency = 2ms;
  p.loss_prob = 0.05;
  p.mtu_bytes = 1500;
  return p;
}

LinkProfile default_cellular() {
  LinkProfile p;
  p.name = "cellular";
  p.band = Band::Cellular;
  p.range_m = kUnboundedRange;
  p.bitrate_bps = 1'000'000;
  p.base_latency = 80ms;
  p.loss_prob = 0.01;
  p.mtu_bytes = 1400;
  return p;
}

std::vector<LinkProfile> default_profiles() {
  return {default_subghz(), default_wifi24(), default_cellular()};
}

SimDuration airtime(const LinkProfile& link, std::size_t bytes) {
  // bits × 1e9 / bps as an exact integer ceiling; exact below ~2 GB per packet.
  const std::uint64_t scaled = static_cast<std::uint64_t>(bytes) * 8u * 1'000'000'000u;
  const std::uint64_t ns = (scaled + link.bitrate_bps - 1) / link.bitrate_bps;
  return SimDuration(static_cast<std::int64_t>(ns));
}

double distance(Position a, Position b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool in_range(Position a, Position b, const LinkProfile& link) noexcept {
  if (link.band == Band::Cellular) return true;
  return distance(a, b) <= link.range_m;
}

SimDuration DutyCycleMeter::usage(SimTime from, SimTime to) const {
  SimDuration total{};
  for (const auto& r : records_) {
    const SimTime lo = std::max(from, r.start);
    const SimTime hi = std::min(to, r.end());
    if (hi > lo) total += hi - lo;
  }
  return total;
}

bool DutyCycleMeter::admits(SimTime now, SimDuration air) const {
  const SimTime end = now + air;
  return usage(end - duty_.window, end) + air <= duty_.budget();
}

std::optional<SimTime> DutyCycleMeter::earliest_start(SimTime now, SimDuration air) const {
  if (air > duty_.budget()) return std::nullopt;
  if (admits(now, air)) return now;
  // Usage of the trailing window only shrinks as the start moves later, and
  // by now + window every past record has left it.
  SimTime lo = now;
  SimTime hi = now + duty_.window;
  while (hi - lo > SimDuration(1)) {
    const SimTime mid = lo + (hi - lo) / 2;
    if (admits(mid, air)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void DutyCycleMeter::record(SimTime start, SimDuration air) {
  prune(start);
  records_.push_back(AirtimeRecord{start, air});
}

void DutyCycleMeter::prune(SimTime now) {
  while (!records_.empty() && records_.front().end() < now - duty_.window) records_.pop_front();
}

SimDuration max_window_airtime(std::span<const AirtimeRecord> records, SimDuration window) {
  // Records are sorted and disjoint, so the window sum is piecewise linear in
  // its position and peaks with one edge on a record boundary. Prefix sums plus
  // binary search evaluate each candidate in O(log n).
  const std::size_t n = records.size();
  std::vector<SimDuration> prefix(n + 1, SimDuration{});
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + records[i].airtime;

  SimDuration best{};
  for (std::size_t i = 0; i < n; ++i) {
    // Window [start_i, start_i + window].
    const SimTime hi = records[i].start + window;
    const auto last = std::partition_point(records.begin() + static_cast<std::ptrdiff_t>(i), records.end(),
                                           [hi](const AirtimeRecord& r) { return r.start < hi; });
    const auto j = static_cast<std::size_t>(last - records.begin());
    SimDuration sum = prefix[j] - prefix[i];
    if (j > i) sum -= std::max(SimDuration{}, records[j - 1].end() - hi);
    best = std::max(best, sum);

    // Window [end_i - window, end_i].
    const SimTime lo = records[i].end() - window;
    const auto first = std::partition_point(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                            [lo](const AirtimeRecord& r) { return r.end() <= lo; });
    const auto k = static_cast<std::size_t>(first - records.begin());
    SimDuration tail = prefix[i + 1] - prefix[k];
    if (k <= i) tail -= std::max(SimDuration{}, lo - records[k].start);
    best = std::max(best, tail);
  }
  return best;
}

Result<TransmitResult> transmit(const LinkProfile& link, NodeId sender, std::size_t packet_bytes,
                                std::span<const Receiver> receivers, SimTime now, Rng& rng,
                                DutyCycleMeter* meter) {
  if (packet_bytes > link.mtu_bytes) return Errc::MtuExceeded;

  TransmitResult out;
  out.airtime = airtime(link, packet_bytes);

  if (link.band == Band::SubGHz && meter != nullptr) {
    auto start = meter->earliest_start(now, out.airtime);
    if (!start) return Errc::MtuExceeded;
    if (*start > now) {
      out.kind = TransmitResult::Kind::Deferred;
      out.deferred_until = *start;
      return out;
    }
    meter->record(now, out.airtime);
  }

  const SimTime arrival = now + link.base_latency + out.airtime;
  for (const auto& r : receivers) {
    if (r.id == sender) continue;
    if (link.band != Band::Cellular && !(r.distance_m <= link.range_m)) {
      out.out_of_range.push_back(r.id);
      continue;
    }
    if (rng.bernoulli(link.loss_prob)) {
      out.lost.push_back(r.id);
    } else {
      out.deliveries.push_back(Delivery{r.id, arrival});
    }
  }
  return out;
}

LinkSelector::LinkSelector(std::vector<LinkProfile> profiles, HealthPolicy policy)
    : profiles_(std::move(profiles)),
      policy_(policy),
      health_(profiles_.size(), 1.0),
      last_used_(profiles_.size(), SimTime{}) {
  if (profiles_.empty()) throw std::invalid_argument("link selector needs at least one profile");
}

bool LinkSelector::covers(std::size_t i, double d) const {
  const auto& p = profiles_[i];
  return p.band == Band::Cellular || d <= p.range_m;
}

Result<std::size_t> LinkSelector::select(double dest_distance_m, SimTime now) {
  std::vector<std::size_t> order(profiles_.size());
  std::iota(order.begin(), order.end(), 0);
  // Local radios by bitrate, cellular last.
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    const bool ca = profiles_[a].band == Band::Cellular;
    const bool cb = profiles_[b].band == Band::Cellular;
    if (ca != cb) return cb;
    return profiles_[a].bitrate_bps > profiles_[b].bitrate_bps;
  });

  std::optional<std::size_t> best;
  if (!policy_.failover) {
    for (auto i : order) {
      if (covers(i, dest_distance_m)) {
        best = i;
        break;
      }
    }
  } else {
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
      if (active_ != i && !healthy(i) && now - last_used_[i] >= policy_.probe_interval) {
        health_[i] = policy_.threshold;
      }
    }
    for (auto i : order) {
      if (healthy(i) && covers(i, dest_distance_m)) {
        best = i;
        break;
      }
    }
    if (!best) {
      for (auto i : order) {
        if (covers(i, dest_distance_m) && (!best || health_[i] > health_[*best])) best = i;
      }
    }
    // Hold a still-usable active link against upgrades during hysteresis.
    if (best && active_ && *best != *active_ && healthy(*active_) &&
        covers(*active_, dest_distance_m) && now - last_switch_ < policy_.hysteresis) {
      best = active_;
    }
  }
  if (!best) return Errc::NoViableLink;

  if (active_ && *active_ != *best) {
    ++switches_;
    last_switch_ = now;
  } else if (!active_) {
    last_switch_ = now;
  }
  active_ = best;
  last_used_[*best] = now;
  return *best;
}

void LinkSelector::report(std::size_t link, double sample) {
  auto& h = health_.at(link);
  h = (1.0 - policy_.alpha) * h + policy_.alpha * std::clamp(sample, 0.0, 1.0);
}

}  // namespace swarmlink::links
