#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kfn/core_model.hpp"
#include "kfn/simulator.hpp"
#include "kfn/strategies.hpp"

namespace kfn {

inline constexpr int kScenarioVersion = 1;

enum class CandidatePool { All, Sample };

// Parameters of the scheduled-flow demo.
struct SchedulerParams {
  double alpha = 0.3;
  double default_ert = 3.0;
  double beta = 0.5;
  CandidatePool candidate_pool = CandidatePool::All;
  std::uint32_t candidate_pool_size = 0;  // used with CandidatePool::Sample
  double busy_fraction = 0.0;             // task-calendar density, [0, 1)
  std::uint32_t ert_observations = 3;     // warm-up samples per node
  Tick now = 0;
  double initial_quality = 0.0;
  std::string knowledge_link = "kb://flowing-item";
  std::string problem = "improve the flowing knowledge";
};

// File names written inside the output directory.
struct OutputPaths {
  std::string per_node = "per_node.csv";
  std::string per_slot = "per_slot.csv";
  std::string totals = "totals.csv";
  std::string summary = "summary.json";
  std::string flow = "flow.json";
  std::string control_message = "control_message.json";
};

struct Scenario {
  int version = kScenarioVersion;
  SimConfig sim;
  SchedulerParams scheduler;
  std::vector<Strategy> strategies;
  OutputPaths outputs;
  // Dotted paths of optional fields that were filled with defaults.
  std::vector<std::string> defaults_applied;
  // SHA-256 (hex) of the scenario file bytes.
  std::string digest;

  // Every effective parameter, plus the fixed model choices, as JSON.
  nlohmann::json effective_parameters() const;
};

// Throws ParseError on malformed JSON and ValidationError (with the dotted
// field path) on unknown keys, wrong types, or out-of-bound values.
Scenario parse_scenario(std::string_view text);
// As parse_scenario; throws IoError if the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace kfn
