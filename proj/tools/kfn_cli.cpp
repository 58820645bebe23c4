// kfn: knowledge-flow network simulator and flow scheduler.
//
//   kfn simulate --scenario <path> [--strategy <name>] [--seed <n>] --out <dir>
//   kfn sweep    --scenario <path> --out <dir>
//   kfn flow     --scenario <path> --recipient <id> --unit-field <id> --tc <ticks> --out <dir>
//
// Exit status: 0 on success, 1 on validation errors, 2 on I/O errors.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kfn/errors.hpp"
#include "kfn/harness.hpp"
#include "kfn/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-flow network simulator and flow scheduler"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;

  auto* simulate = app.add_subcommand("simulate", "Run one strategy over the scenario");
  std::string strategy_name;
  std::optional<std::uint64_t> seed;
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--strategy", strategy_name,
                       "random | greedy | generous | selfish | conscious");
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run every listed strategy with the scenario seed");
  sweep->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* flow = app.add_subcommand("flow", "Schedule and execute one knowledge flow");
  std::uint32_t recipient = 0;
  std::uint32_t unit_field = 0;
  std::int64_t tc = 0;
  flow->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  flow->add_option("--recipient", recipient, "Recipient node id")->required();
  flow->add_option("--unit-field", unit_field, "Unit field of the flowing knowledge")->required();
  flow->add_option("--tc", tc, "Time constraint in ticks")->required();
  flow->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    const kfn::Scenario scn = kfn::load_scenario(scenario_path);
    if (simulate->parsed()) {
      kfn::SimulateOptions opts;
      opts.seed = seed;
      if (!strategy_name.empty()) {
        opts.strategy = kfn::parse_strategy(strategy_name);
        if (!opts.strategy) {
          std::cerr << "error: unknown strategy \"" << strategy_name << "\"\n";
          return kExitValidation;
        }
      }
      const auto result = kfn::run_simulate(scn, opts, out_dir);
      for (const auto& s : result.summary["strategies"]) {
        std::cout << s["strategy"].get<std::string>() << ": success=" << s["success"]
                  << " failure=" << s["failure"] << " lost=" << s["lost"] << "\n";
      }
    } else if (sweep->parsed()) {
      const auto result = kfn::run_sweep(scn, out_dir);
      for (const auto& s : result.summary["strategies"]) {
        std::cout << s["strategy"].get<std::string>() << ": success=" << s["success"]
                  << " failure=" << s["failure"] << " lost=" << s["lost"] << "\n";
      }
    } else if (flow->parsed()) {
      const auto result = kfn::run_flow_demo(
          scn, kfn::FlowDemoRequest{recipient, unit_field, tc}, out_dir);
      std::cout << result.message.flow_id << ": " << result.message.hops.size()
                << " hops, delivered at " << result.outcome.delivery_time << " (deadline "
                << result.message.deadline << "), quality " << result.outcome.initial_quality
                << " -> " << result.outcome.final_quality << "\n";
    }
  } catch (const kfn::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const kfn::ValidationError& e) {
    std::cerr << "validation error at " << e.field() << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const kfn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
