#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "kfn/flow_scheduler.hpp"
#include "kfn/routing_control.hpp"
#include "kfn/scenario.hpp"
#include "kfn/simulator.hpp"

namespace kfn {

struct SweepResult {
  std::vector<SimulationReport> reports;  // in scenario strategy order
  nlohmann::json summary;
};

// Runs every listed strategy with the scenario seed (in parallel; results do
// not depend on scheduling) and writes per-node, per-slot and totals CSVs plus
// summary.json into out_dir. Throws IoError.
SweepResult run_sweep(const Scenario& scn, const std::filesystem::path& out_dir);

struct SimulateOptions {
  std::optional<Strategy> strategy;  // default: first listed strategy
  std::optional<std::uint64_t> seed;
};

// Single-strategy variant of run_sweep with the same output files.
SweepResult run_simulate(const Scenario& scn, const SimulateOptions& opts,
                         const std::filesystem::path& out_dir);

struct FlowDemoRequest {
  NodeId recipient = 0;
  UnitFieldId unit_field = 0;
  Tick time_constraint = 0;
};

struct FlowDemoResult {
  EnergyMatrix energies;
  std::vector<Calendar> task_calendars;
  FlowList flow;
  ControlMessage message;
  FlowOutcome outcome;
};

// Builds energies, task calendars and ERTs from the scenario seed, schedules
// one flow towards the recipient and executes it. Writes the canonical
// control message and flow.json. Throws ValidationError for out-of-range
// request fields and IoError.
FlowDemoResult run_flow_demo(const Scenario& scn, const FlowDemoRequest& req,
                             const std::filesystem::path& out_dir);

// Synthetic task calendar of one node over `window`, about `busy_fraction`
// of it busy.
Calendar random_task_calendar(const TimeInterval& window, double busy_fraction, Rng& rng);

// Number rendering used in every CSV: fixed, six decimals.
std::string format_real(double x);

}  // namespace kfn
