// swarmlink: validate and run scenario files, emit reports, and write
// deterministic wire-format samples.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "golden.hpp"
#include "swarmlink/scenario.hpp"
#include "swarmlink/simulator.hpp"

namespace fs = std::filesystem;
using namespace swarmlink;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::string mode;
  std::string trace;
};

bool write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return false;
  f << content;
  return static_cast<bool>(f.flush());
}

std::optional<fs::path> default_output(const sim::Scenario& s, const std::string& ext) {
  const char* dir = std::getenv("SWARMLINK_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return fs::path(dir) / (s.name + "-" + std::to_string(s.seed) + "." + ext);
}

int cmd_run(const RunArgs& args, int verbosity) {
  sim::Scenario scenario;
  try {
    scenario = sim::load_scenario(args.scenario);
    if (args.seed) scenario.seed = *args.seed;
    if (args.mode == "mesh") scenario.mode = mesh::TopologyMode::Mesh;
    if (args.mode == "star") scenario.mode = mesh::TopologyMode::Star;
  } catch (const sim::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const sim::ValidationError& e) {
    std::cerr << args.scenario << ": invalid scenario: " << e.what() << "\n";
    return kExitValidation;
  }

  sim::RunOptions options;
  options.trace = !args.trace.empty();
  sim::RunResult result;
  try {
    result = sim::run_scenario(scenario, options);
  } catch (const sim::ValidationError& e) {
    std::cerr << args.scenario << ": invalid scenario: " << e.what() << "\n";
    return kExitValidation;
  }

  const std::string body =
      args.format == "csv" ? sim::report_to_csv(result.report) : sim::report_to_json(result.report);

  std::optional<fs::path> out;
  if (!args.out.empty()) {
    out = fs::path(args.out);
  } else {
    out = default_output(scenario, args.format);
  }
  if (out) {
    if (!write_file(*out, body)) {
      std::cerr << "error: cannot write report to " << out->string() << "\n";
      return kExitIo;
    }
  } else {
    std::cout << body;
  }

  if (!args.trace.empty() && !write_file(args.trace, result.trace)) {
    std::cerr << "error: cannot write trace to " << args.trace << "\n";
    return kExitIo;
  }

  if (verbosity > 0) {
    const auto& r = result.report;
    std::cerr << scenario.name << " seed=" << r.seed << " mode=" << r.mode
              << " events=" << r.events_processed << " delivery="
              << (r.delivery_ratio ? std::to_string(*r.delivery_ratio) : "n/a")
              << " audits=" << (r.audits.passed ? "pass" : "FAIL") << "\n";
    if (out) std::cerr << "report written to " << out->string() << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::vector<std::string>& files, int verbosity) {
  int rc = kExitOk;
  for (const auto& f : files) {
    try {
      const auto s = sim::load_scenario(f);
      if (verbosity > 0) std::cerr << f << ": ok (" << s.name << ", " << s.nodes.size() << " nodes)\n";
    } catch (const sim::IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitIo;
    } catch (const sim::ValidationError& e) {
      std::cerr << f << ": invalid scenario: " << e.what() << "\n";
      rc = kExitValidation;
    }
  }
  return rc;
}

int cmd_golden(const std::string& out) {
  const std::string body = tools::golden_wire_samples();
  if (out.empty() || out == "-") {
    std::cout << body;
    return kExitOk;
  }
  if (!write_file(out, body)) {
    std::cerr << "error: cannot write " << out << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarmlink: secure UAV swarm telemetry simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Print a run summary on standard error");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a scenario and write its metrics report");
  run->add_option("--scenario", run_args.scenario, "Scenario JSON file")->required();
  run->add_option("--seed", run_args.seed, "Override the scenario seed");
  run->add_option("--out", run_args.out,
                  "Report path (default: $SWARMLINK_OUT_DIR/<name>-<seed>.<format>, else stdout)");
  run->add_option("--format", run_args.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--mode", run_args.mode, "Override the topology mode")->check(CLI::IsMember({"mesh", "star"}));
  run->add_option("--trace", run_args.trace, "Write the newline-delimited event trace here");

  std::vector<std::string> validate_files;
  auto* validate = app.add_subcommand("validate", "Check scenario files without running them");
  validate->add_option("--scenario,scenarios", validate_files, "Scenario JSON files")->required();

  std::string golden_out;
  auto* golden = app.add_subcommand("golden", "Write deterministic wire-packet samples");
  golden->add_option("--out", golden_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (*run) return cmd_run(run_args, verbosity);
  if (*validate) return cmd_validate(validate_files, verbosity);
  if (*golden) return cmd_golden(golden_out);
  return kExitValidation;
}
