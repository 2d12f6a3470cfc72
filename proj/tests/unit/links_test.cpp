#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "swarmlink/links.hpp"

using namespace swarmlink;
using namespace swarmlink::links;
using namespace std::chrono_literals;

TEST(LinkProfiles, DefaultsAreValidAndOrdered) {
  for (const auto& p : default_profiles()) EXPECT_NO_THROW(p.validate());
  const auto sub = default_subghz();
  const auto wifi = default_wifi24();
  const auto cell = default_cellular();
  ASSERT_TRUE(sub.duty);
  EXPECT_FALSE(wifi.duty);
  EXPECT_TRUE(std::isinf(cell.range_m));
  EXPECT_GT(sub.range_m, wifi.range_m);
  // Same payload, both in range: WiFi arrives first.
  EXPECT_LT(wifi.base_latency + airtime(wifi, 100), sub.base_latency + airtime(sub, 100));
}

TEST(LinkProfiles, ValidationNamesField) {
  auto p = default_wifi24();
  p.loss_prob = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = default_wifi24();
  p.duty = DutyCycle{};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = default_subghz();
  p.duty->limit = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = default_wifi24();
  p.bitrate_bps = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Airtime, RoundsUp) {
  LinkProfile p = default_wifi24();
  p.bitrate_bps = 3;
  EXPECT_EQ(airtime(p, 1), SimDuration(2666666667));
  p.bitrate_bps = 8'000'000;
  EXPECT_EQ(airtime(p, 1000), 1ms);
}

TEST(Range, ClosedDisc) {
  LinkProfile p = default_wifi24();
  p.range_m = 100;
  EXPECT_TRUE(in_range({0, 0}, {60, 80}, p));
  EXPECT_FALSE(in_range({0, 0}, {60, 80.001}, p));
  EXPECT_TRUE(in_range({0, 0}, {1e9, 0}, default_cellular()));
}

TEST(Transmit, DeliversLosesAndChecksMtu) {
  LinkProfile p = default_wifi24();
  p.range_m = 100;
  p.loss_prob = 0;
  Rng rng(1);
  std::vector<Receiver> rx{{node_id(1), 50}, {node_id(2), 150}};
  auto r = transmit(p, node_id(0), 200, rx, 1s, rng, nullptr);
  ASSERT_TRUE(r);
  ASSERT_EQ(r->deliveries.size(), 1u);
  EXPECT_EQ(r->deliveries[0].arrival, 1s + p.base_latency + airtime(p, 200));
  EXPECT_EQ(r->out_of_range, std::vector<NodeId>{node_id(2)});
  EXPECT_EQ(transmit(p, node_id(0), p.mtu_bytes + 1, rx, 1s, rng, nullptr).error(), Errc::MtuExceeded);

  p.loss_prob = 1.0;
  auto lost = transmit(p, node_id(0), 10, rx, 1s, rng, nullptr);
  EXPECT_TRUE(lost->deliveries.empty());
  EXPECT_EQ(lost->lost.size(), 1u);
}

TEST(Transmit, LossRateMatchesProbability) {
  LinkProfile p = default_wifi24();
  p.loss_prob = 0.3;
  Rng rng(9);
  std::vector<Receiver> rx{{node_id(1), 1}};
  int lost = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) lost += transmit(p, node_id(0), 10, rx, 0s, rng, nullptr)->lost.empty() ? 0 : 1;
  EXPECT_NEAR(static_cast<double>(lost) / n, 0.3, 0.015);
}

TEST(DutyCycle, MeterDefersAndNeverExceedsBudget) {
  DutyCycleMeter m(DutyCycle{0.1, 10s});  // 1 s per 10 s
  EXPECT_EQ(m.duty().budget(), 1s);
  EXPECT_TRUE(m.admits(0s, 600ms));
  m.record(0s, 600ms);
  EXPECT_FALSE(m.admits(1s, 600ms));
  EXPECT_TRUE(m.admits(1s, 400ms));
  // A 200 ms burst starting at 10 s shares the window [0.2 s, 10.2 s] with
  // 400 ms of each earlier burst: exactly the budget.
  m.record(1s, 400ms);
  auto at = m.earliest_start(2s, 200ms);
  ASSERT_TRUE(at);
  EXPECT_EQ(*at, 10s);
  EXPECT_FALSE(m.earliest_start(0s, 2s));
}

TEST(DutyCycle, RandomScheduleStaysWithinBudget) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const DutyCycle duty{0.01 + rng.uniform01() * 0.2, from_seconds(1 + rng.uniform01() * 20)};
    DutyCycleMeter m(duty);
    std::vector<AirtimeRecord> log;
    SimTime t{0};
    for (int i = 0; i < 300; ++i) {
      const SimDuration air = SimDuration(rng.uniform_int(1, static_cast<std::uint64_t>(duty.budget().count() / 3)));
      t += SimDuration(rng.uniform_int(0, static_cast<std::uint64_t>(duty.window.count() / 20)));
      auto start = m.earliest_start(t, air);
      ASSERT_TRUE(start);
      m.record(*start, air);
      log.push_back({*start, air});
      t = *start + air;
    }
    const auto oracle_max = oracle::brute_force_window_airtime(log, duty.window);
    EXPECT_LE(oracle_max, duty.budget()) << "trial " << trial;
    EXPECT_EQ(max_window_airtime(log, duty.window), oracle_max) << "trial " << trial;
  }
}

TEST(Transmit, DutyLimitedLinkReportsDeferral) {
  LinkProfile p = default_subghz();
  p.loss_prob = 0;
  p.duty = DutyCycle{0.01, 10s};  // 100 ms budget
  DutyCycleMeter m(*p.duty);
  Rng rng(4);
  std::vector<Receiver> rx{{node_id(1), 10}};
  SimTime now{0};
  int sent = 0;
  for (;;) {
    auto r = transmit(p, node_id(0), 200, rx, now, rng, &m);
    ASSERT_TRUE(r);
    if (!r->sent()) {
      EXPECT_GT(r->deferred_until, now);
      break;
    }
    ++sent;
    now += r->airtime;
  }
  EXPECT_EQ(sent, static_cast<int>(100ms / airtime(p, 200)));
}

TEST(LinkSelector, PrefersFastHealthyCoveringLink) {
  LinkSelector s(default_profiles(), HealthPolicy{});
  const auto& profiles = s.profiles();
  auto idx = [&](Band b) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if (profiles[i].band == b) return i;
    }
    return profiles.size();
  };
  EXPECT_EQ(*s.select(100, 0s), idx(Band::WiFi24));
  EXPECT_EQ(*s.select(1000, 0s), idx(Band::SubGHz));
  EXPECT_EQ(*s.select(1e6, 0s), idx(Band::Cellular));
}

TEST(LinkSelector, FailsOverWithHysteresisAndProbesBack) {
  HealthPolicy policy;
  policy.alpha = 0.5;
  policy.threshold = 0.5;
  policy.hysteresis = 2s;
  policy.probe_interval = 10s;
  LinkSelector s({default_wifi24(), default_subghz()}, policy);
  EXPECT_EQ(*s.select(100, 0s), 0u);
  s.report(0, 0.0);
  s.report(0, 0.0);  // health 0.25
  EXPECT_EQ(*s.select(100, 1s), 1u);
  EXPECT_EQ(s.switches(), 1u);
  // WiFi idle for the probe interval gets another chance, but hysteresis from
  // the switch at 1 s has to lapse first.
  EXPECT_EQ(*s.select(100, 2s), 1u);
  EXPECT_EQ(*s.select(100, 12s), 0u);
  EXPECT_EQ(s.switches(), 2u);
}

TEST(LinkSelector, DegradedFallbackAndNoViableLink) {
  HealthPolicy policy;
  policy.alpha = 1.0;
  LinkSelector s({default_wifi24()}, policy);
  s.report(0, 0.0);
  EXPECT_EQ(*s.select(100, 0s), 0u);  // nothing healthier covers: keep using it
  EXPECT_EQ(s.select(1000, 0s).error(), Errc::NoViableLink);

  policy.failover = false;
  LinkSelector plain({default_wifi24(), default_subghz()}, policy);
  plain.report(0, 0.0);
  EXPECT_EQ(*plain.select(100, 0s), 0u);
}
