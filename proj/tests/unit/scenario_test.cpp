#include <gtest/gtest.h>

#include <filesystem>

#include "json.hpp"
#include "swarmlink/scenario.hpp"

using namespace swarmlink;
using namespace swarmlink::sim;
using json = nlohmann::json;
using namespace std::chrono_literals;

namespace {

json base() {
  return json::parse(R"({
    "name": "t", "seed": 1, "duration_s": 10,
    "nodes": [
      {"id": 0, "role": "gcs", "position": [0, 0]},
      {"id": 1, "role": "uav", "position": {"x": 10, "y": 5}}
    ]
  })");
}

std::string error_path(const json& j) {
  try {
    parse_scenario(j.dump());
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<accepted>";
}

std::string error_message(const json& j) {
  try {
    parse_scenario(j.dump());
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "<accepted>";
}

}  // namespace

TEST(Scenario, ParsesDefaultsAndOverrides) {
  auto j = base();
  j["links"] = json::array({{{"band", "wifi24"}, {"loss_prob", 0.0}, {"range_m", 150}},
                            {{"band", "cellular"}, {"range_m", "unbounded"}}});
  j["protocol"] = {{"key_lifetime_s", 2.5}, {"hop_limit", 3}};
  j["traffic"] = {{"uav_rate_hz", 4}, {"stop_s", 8}};
  j["adversaries"] = json::array({{{"kind", "eavesdrop"}, {"leaked_epochs", {2, 3}}}});
  const auto s = parse_scenario(j.dump());
  EXPECT_EQ(s.name, "t");
  EXPECT_EQ(s.duration, 10s);
  EXPECT_EQ(s.mode, mesh::TopologyMode::Mesh);
  ASSERT_EQ(s.nodes.size(), 2u);
  EXPECT_EQ(s.nodes[1].position.x, 10);
  EXPECT_EQ(s.gcs_id(), node_id(0));
  ASSERT_EQ(s.links.size(), 2u);
  EXPECT_EQ(s.links[0].range_m, 150);
  EXPECT_EQ(s.links[0].loss_prob, 0.0);
  EXPECT_TRUE(std::isinf(s.links[1].range_m));
  EXPECT_EQ(s.protocol.key_lifetime, 2500ms);
  EXPECT_EQ(s.protocol.hop_limit, 3);
  EXPECT_EQ(s.protocol.grace_window, 5s);
  EXPECT_EQ(s.traffic_stop(), 8s);
  ASSERT_EQ(s.adversaries.size(), 1u);
  EXPECT_FALSE(s.adversaries[0].target);
  EXPECT_EQ(s.adversaries[0].leaked_epochs, (std::vector<std::uint32_t>{2, 3}));

  const auto d = parse_scenario(base().dump());
  EXPECT_EQ(d.links.size(), 3u);
  EXPECT_EQ(d.traffic_stop(), 9s);
}

TEST(Scenario, TwoGcsNodesNamesTheConstraint) {
  auto j = base();
  j["nodes"].push_back({{"id", 2}, {"role", "gcs"}, {"position", {1, 1}}});
  EXPECT_EQ(error_path(j), "$.nodes");
  EXPECT_NE(error_message(j).find("exactly one GCS"), std::string::npos);
}

TEST(Scenario, RejectsBrokenFieldsWithPaths) {
  auto j = base();
  j["nodes"][1]["role"] = "drone";
  EXPECT_EQ(error_path(j), "$.nodes[1].role");

  j = base();
  j["nodes"][1]["id"] = 0;
  EXPECT_EQ(error_path(j), "$.nodes[1].id");

  j = base();
  j["nodes"][0]["colour"] = "red";
  EXPECT_EQ(error_path(j), "$.nodes[0].colour");

  j = base();
  j["duration_s"] = 0;
  EXPECT_EQ(error_path(j), "$.duration_s");

  j = base();
  j["links"] = json::array({{{"band", "wifi24"}, {"loss_prob", 2}}});
  EXPECT_EQ(error_path(j).rfind("$.links[0]", 0), 0u);

  j = base();
  j["links"] = json::array({{{"band", "laser"}}});
  EXPECT_EQ(error_path(j), "$.links[0].band");

  j = base();
  j["traffic"] = {{"payload_max", 300}};
  EXPECT_EQ(error_path(j).rfind("$.traffic", 0), 0u);

  j = base();
  j["adversaries"] = json::array({{{"kind", "mitm_key_substitution"}, {"target", 9}}});
  EXPECT_EQ(error_path(j), "$.adversaries[0].target");

  j = base();
  j["link_events"] = json::array({{{"t_s", 1}, {"link", "nope"}, {"loss_prob", 0.5}}});
  EXPECT_EQ(error_path(j), "$.link_events[0].link");

  j = base();
  j["rekey_drops"] = json::array({{{"uav", 0}, {"epoch", 1}}});
  EXPECT_EQ(error_path(j), "$.rekey_drops[0].uav");

  j = base();
  j["nodes"] = json::array({{{"id", 0}, {"role", "gcs"}, {"position", {0, 0}}}});
  EXPECT_EQ(error_path(j), "$.nodes");

  EXPECT_THROW(parse_scenario("{not json"), ValidationError);
  EXPECT_THROW(parse_scenario("[]"), ValidationError);
}

TEST(Scenario, PayloadMustFitSmallestMtu) {
  auto j = base();
  j["links"] = json::array({{{"band", "subghz"}}});
  j["traffic"] = {{"payload_max", 255}};
  EXPECT_EQ(error_path(j).rfind("$.traffic", 0), 0u);
  j["traffic"] = {{"payload_max", 200}};
  EXPECT_NO_THROW(parse_scenario(j.dump()));
}

TEST(Scenario, MissingFileIsIoError) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST(Scenario, ShippedScenariosValidate) {
  const std::filesystem::path dir = SWARMLINK_SCENARIO_DIR;
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_scenario(entry.path()));
    ++count;
  }
  EXPECT_EQ(count, 10u);
}
