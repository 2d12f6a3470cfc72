#include <gtest/gtest.h>

#include "json.hpp"
#include "swarmlink/simulator.hpp"

using namespace swarmlink;
using namespace swarmlink::sim;
using namespace std::chrono_literals;

namespace {

Scenario small(std::size_t uavs = 3) {
  Scenario s;
  s.name = "unit";
  s.seed = 5;
  s.duration = 12s;
  s.nodes.push_back(NodeSpec{node_id(0), Role::Gcs, {0, 0}, {}, false, std::nullopt});
  for (std::size_t i = 1; i <= uavs; ++i) {
    s.nodes.push_back(NodeSpec{node_id(static_cast<std::uint16_t>(i)), Role::Uav,
                               {50.0 * static_cast<double>(i), 0}, {}, false, std::nullopt});
  }
  auto wifi = links::default_wifi24();
  wifi.loss_prob = 0;
  s.links = {wifi};
  s.traffic.gcs_rate_hz = 1;
  return s;
}

}  // namespace

TEST(Simulator, LosslessRunDeliversEverything) {
  const auto r = run_scenario(small()).report;
  ASSERT_TRUE(r.delivery_ratio);
  EXPECT_DOUBLE_EQ(*r.delivery_ratio, 1.0);
  EXPECT_EQ(r.handshake.sessions_established, 3u);
  EXPECT_TRUE(r.audits.passed);
  EXPECT_TRUE(r.conservation.balanced);
  EXPECT_EQ(r.security.duplicate_deliveries, 0u);
  EXPECT_EQ(r.keys.min_uav_epoch, 1u);
  EXPECT_EQ(r.pairs.size(), 12u);
}

TEST(Simulator, SameSeedSameBytes) {
  const auto s = small();
  const auto a = run_scenario(s);
  const auto b = run_scenario(s);
  EXPECT_EQ(report_to_json(a.report), report_to_json(b.report));
  EXPECT_EQ(a.trace, b.trace);
  auto other = s;
  other.seed = 6;
  EXPECT_NE(run_scenario(other).trace, a.trace);
}

TEST(Simulator, TraceIsNewlineDelimitedJson) {
  const auto r = run_scenario(small(1));
  ASSERT_FALSE(r.trace.empty());
  std::istringstream in(r.trace);
  std::string line;
  std::int64_t last = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_GE(j.at("t").get<std::int64_t>(), last);
    last = j.at("t").get<std::int64_t>();
    EXPECT_TRUE(j.contains("node"));
    EXPECT_TRUE(j.contains("ev"));
  }
  RunOptions quiet;
  quiet.trace = false;
  EXPECT_TRUE(run_scenario(small(1), quiet).trace.empty());
}

TEST(Simulator, ReportJsonHasEveryFieldWithNulls) {
  auto s = small(1);
  s.traffic.uav_rate_hz = 0;
  s.traffic.gcs_rate_hz = 0;
  const auto j = nlohmann::json::parse(report_to_json(run_scenario(s).report));
  for (const char* key : {"scenario", "seed", "mode", "delivery_ratio", "uav_to_uav_delivery_ratio", "latency",
                          "pairs", "overhead_bytes", "security", "handshake", "keys", "nodes", "adversaries",
                          "conservation", "audits", "link_switches"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["delivery_ratio"].is_null());
  EXPECT_TRUE(j["latency"]["mean_s"].is_null());
}

TEST(Simulator, CsvHasOneRowPerPair) {
  const auto report = run_scenario(small(2)).report;
  const auto csv = report_to_csv(report);
  EXPECT_EQ(csv.rfind("scenario,seed,mode,from,to,offered,delivered,delivery_ratio\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6);
}

TEST(Simulator, FailedNodeStopsReceiving) {
  auto s = small(2);
  s.nodes[2].fail_at = 5s;
  const auto r = run_scenario(s).report;
  EXPECT_TRUE(r.audits.passed);
  EXPECT_TRUE(r.conservation.balanced);
  EXPECT_FALSE(r.nodes[2].up_at_end);
  for (const auto& p : r.pairs) {
    if (p.to == node_id(2)) EXPECT_LT(*p.delivery_ratio, 0.7);
  }
}

TEST(Simulator, OfflineUavIsUnreachable) {
  auto s = small(2);
  s.nodes[2].offline = true;
  s.protocol.handshake_timeout = 1s;
  s.protocol.handshake_retries = 2;
  const auto r = run_scenario(s).report;
  EXPECT_EQ(r.handshake.unreachable, std::vector<NodeId>{node_id(2)});
  EXPECT_EQ(r.handshake.attempts, 1u + 3u);
}

TEST(Simulator, StarModeRelaysThroughGcs) {
  auto s = small(3);
  s.mode = mesh::TopologyMode::Star;
  const auto r = run_scenario(s).report;
  EXPECT_EQ(r.mode, "star");
  EXPECT_DOUBLE_EQ(*r.uav_to_uav_delivery_ratio, 1.0);
  EXPECT_EQ(r.keys.rotations, 0u);
  EXPECT_EQ(r.overhead.rekey, 0u);
}

TEST(Simulator, KeysRotateAndUavsFollow) {
  auto s = small(2);
  s.protocol.key_lifetime = 2s;
  s.protocol.grace_window = 500ms;
  const auto r = run_scenario(s).report;
  EXPECT_GE(r.keys.rotations, 5u);
  EXPECT_EQ(r.keys.min_uav_epoch, r.keys.gcs_epoch);
  EXPECT_EQ(r.audits.epoch_regressions, 0u);
  EXPECT_EQ(r.audits.nonce_reuse, 0u);
  EXPECT_DOUBLE_EQ(*r.delivery_ratio, 1.0);
}

TEST(Simulator, MissedRekeyShowsUpAsDeliveryLoss) {
  auto s = small(2);
  s.protocol.key_lifetime = 3s;
  s.protocol.grace_window = 500ms;
  s.rekey_drops = {{node_id(2), 2}};
  const auto r = run_scenario(s).report;
  EXPECT_TRUE(r.audits.passed);
  const auto to2 = std::find_if(r.pairs.begin(), r.pairs.end(),
                                [](const PairMetrics& p) { return p.from == node_id(1) && p.to == node_id(2); });
  ASSERT_NE(to2, r.pairs.end());
  EXPECT_LT(*to2->delivery_ratio, 1.0);
  EXPECT_GT(r.security.unknown_epoch, 0u);
}

TEST(Simulator, InvalidScenarioThrows) {
  Scenario s;
  EXPECT_THROW(run_scenario(s), ValidationError);
}
