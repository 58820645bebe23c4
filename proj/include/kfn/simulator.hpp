#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kfn/core_model.hpp"
#include "kfn/rng.hpp"
#include "kfn/strategies.hpp"

namespace kfn {

struct SimConfig {
  std::uint32_t node_count = 0;
  std::uint32_t querier_count = 0;
  std::uint32_t capacity_per_slot = 0;
  std::uint32_t slot_count = 0;
  double risk = 0.2;            // [0, 1)
  double learning_rate = 0.2;   // (0, 1]
  std::uint32_t lost_after_slots = 1;
  Energy e_max = 10.0;
  std::uint32_t unit_field_count = 1;
  std::uint64_t seed = 0;

  // Throws InvalidConfig naming the offending field.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

enum class QueryStatus { Pending, Success, Failure, Lost };

struct Query {
  std::uint64_t id = 0;
  NodeId requester = 0;
  UnitFieldId unit_field = 0;
  std::uint32_t created_slot = 0;
  std::optional<NodeId> target;
  QueryStatus status = QueryStatus::Pending;
  std::uint32_t resolved_slot = 0;

  // Pending -> terminal only. Throws InvalidTransition otherwise.
  void resolve(QueryStatus terminal, std::uint32_t slot);
};

struct OutcomeCounts {
  std::uint64_t success = 0;
  std::uint64_t failure = 0;
  std::uint64_t lost = 0;

  std::uint64_t total() const noexcept { return success + failure + lost; }
  // Proportions of total; all zero when there were no queries.
  double success_prop() const noexcept;
  double failure_prop() const noexcept;
  double lost_prop() const noexcept;

  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

struct SlotReport {
  std::uint64_t created = 0;
  // Queries that reached a terminal state during this slot.
  OutcomeCounts outcomes;
  std::vector<std::uint64_t> node_success;
  std::vector<std::uint64_t> node_load;

  friend bool operator==(const SlotReport&, const SlotReport&) = default;
};

struct SimulationReport {
  Strategy strategy = Strategy::Random;
  SimConfig config;
  std::vector<NodeId> queriers;
  std::uint64_t created = 0;
  // Queries answered successfully by each node (as responder).
  std::vector<std::uint64_t> per_node_success;
  // Queries received by each node, whether accepted at once or backlogged.
  std::vector<std::uint64_t> per_node_load;
  OutcomeCounts totals;
  std::vector<SlotReport> per_slot;
  EnergyMatrix initial_energies;
  EnergyMatrix final_energies;

  friend bool operator==(const SimulationReport&, const SimulationReport&) = default;
};

// Per-slot acceptance ledger of the network.
struct NetworkState {
  std::uint32_t slot = 0;
  std::vector<std::uint32_t> accepted_this_slot;
};

// Node n is available iff it accepted fewer than `capacity` queries in the
// current slot.
std::vector<bool> available_view(const NetworkState& state, std::uint32_t capacity);

enum class Interaction { Success, Failure };

// Flow only runs from higher to lower energy, so a responder at or below the
// requester always fails. Otherwise success has probability
// (1 - risk) * (responder_e - requester_e) / e_max. Draws from `rng` only in
// the second case.
Interaction interaction_outcome(Energy responder_e, Energy requester_e, double risk,
                                Energy e_max, Rng& rng);

// requester <- requester + lambda * (responder - requester) in field u.
// Throws InvalidUpdate unless the responder is strictly above the requester
// and lambda is in (0, 1].
EnergyMatrix apply_energy_update(const EnergyMatrix& m, NodeId requester, NodeId responder,
                                 UnitFieldId u, double lambda);
void apply_energy_update_in_place(EnergyMatrix& m, NodeId requester, NodeId responder,
                                  UnitFieldId u, double lambda);

// Initial energies (uniform on [0, e_max)) and the querier set, both drawn
// from the scenario seed so every strategy sees the same network.
EnergyMatrix initial_energies(const SimConfig& cfg);
std::vector<NodeId> select_queriers(const SimConfig& cfg);

// Throws InvalidConfig. Same config and strategy give an identical report.
SimulationReport run_simulation(const SimConfig& cfg, Strategy strategy);

// Share of all load carried by the top `fraction` of nodes ranked by mean
// initial energy (ties to the lower id). Returns 0 when there is no load.
double top_load_share(const SimulationReport& report, double fraction);

}  // namespace kfn
