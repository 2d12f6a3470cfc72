#include <benchmark/benchmark.h>

#include <string>

#include "swarmlink/scenario.hpp"
#include "swarmlink/simulator.hpp"

using namespace swarmlink;

namespace {

void run_file(benchmark::State& state, const std::string& name) {
  const auto scenario = sim::load_scenario(std::string(SWARMLINK_SCENARIO_DIR) + "/" + name + ".json");
  sim::RunOptions options;
  options.trace = false;
  std::uint64_t events = 0;
  for (auto _ : state) {
    auto result = sim::run_scenario(scenario, options);
    events += result.report.events_processed;
    benchmark::DoNotOptimize(result);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}

void BM_ScenarioMesh10Lossy(benchmark::State& state) { run_file(state, "mesh_10_lossy"); }
BENCHMARK(BM_ScenarioMesh10Lossy)->Unit(benchmark::kMillisecond);

void BM_ScenarioStarVsMesh(benchmark::State& state) { run_file(state, "star_vs_mesh"); }
BENCHMARK(BM_ScenarioStarVsMesh)->Unit(benchmark::kMillisecond);

void BM_ScenarioReplayAttack(benchmark::State& state) { run_file(state, "replay_attack"); }
BENCHMARK(BM_ScenarioReplayAttack)->Unit(benchmark::kMillisecond);

}  // namespace
