#include "kfn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "kfn/errors.hpp"

namespace kfn {

namespace {

double ratio(std::uint64_t part, std::uint64_t whole) noexcept {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw InvalidConfig(std::string(field) + ": " + what);
}

}  // namespace

void SimConfig::validate() const {
  require(node_count >= 1, "node_count", "must be positive");
  require(querier_count <= node_count, "querier_count", "must not exceed node_count");
  require(capacity_per_slot >= 1, "capacity_per_slot", "must be positive");
  require(slot_count >= 1, "slot_count", "must be positive");
  require(risk >= 0.0 && risk < 1.0, "risk", "must lie in [0, 1)");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate", "must lie in (0, 1]");
  require(lost_after_slots >= 1, "lost_after_slots", "must be positive");
  require(e_max > 0.0 && std::isfinite(e_max), "e_max", "must be positive");
  require(unit_field_count >= 1, "unit_field_count", "must be positive");
}

void Query::resolve(QueryStatus terminal, std::uint32_t slot) {
  if (status != QueryStatus::Pending) {
    throw InvalidTransition("query " + std::to_string(id) + " already resolved");
  }
  if (terminal == QueryStatus::Pending) {
    throw InvalidTransition("cannot resolve a query to Pending");
  }
  status = terminal;
  resolved_slot = slot;
}

double OutcomeCounts::success_prop() const noexcept { return ratio(success, total()); }
double OutcomeCounts::failure_prop() const noexcept { return ratio(failure, total()); }
double OutcomeCounts::lost_prop() const noexcept { return ratio(lost, total()); }

std::vector<bool> available_view(const NetworkState& state, std::uint32_t capacity) {
  std::vector<bool> available(state.accepted_this_slot.size());
  for (std::size_t n = 0; n < available.size(); ++n) {
    available[n] = state.accepted_this_slot[n] < capacity;
  }
  return available;
}

Interaction interaction_outcome(Energy responder_e, Energy requester_e, double risk,
                                Energy e_max, Rng& rng) {
  if (responder_e <= requester_e) return Interaction::Failure;
  const double p = (1.0 - risk) * (responder_e - requester_e) / e_max;
  return rng.uniform() < p ? Interaction::Success : Interaction::Failure;
}

void apply_energy_update_in_place(EnergyMatrix& m, NodeId requester, NodeId responder,
                                  UnitFieldId u, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw InvalidUpdate("learning rate must lie in (0, 1]");
  }
  const Energy mine = m.at(requester, u);
  const Energy theirs = m.at(responder, u);
  if (!(theirs > mine)) {
    throw InvalidUpdate("responder energy must exceed requester energy");
  }
  // Clamp guards against rounding past the responder's level.
  m.set(requester, u, std::min(theirs, mine + lambda * (theirs - mine)));
}

EnergyMatrix apply_energy_update(const EnergyMatrix& m, NodeId requester, NodeId responder,
                                 UnitFieldId u, double lambda) {
  EnergyMatrix out = m;
  apply_energy_update_in_place(out, requester, responder, u, lambda);
  return out;
}

EnergyMatrix initial_energies(const SimConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "energies"));
  EnergyMatrix m(cfg.node_count, cfg.unit_field_count, cfg.e_max);
  for (NodeId n = 0; n < cfg.node_count; ++n) {
    for (UnitFieldId u = 0; u < cfg.unit_field_count; ++u) {
      m.set(n, u, rng.uniform(0.0, cfg.e_max));
    }
  }
  return m;
}

std::vector<NodeId> select_queriers(const SimConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "queriers"));
  std::vector<NodeId> pool(cfg.node_count);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  // Partial Fisher-Yates.
  for (std::uint32_t i = 0; i < cfg.querier_count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.uniform_index(cfg.node_count - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(cfg.querier_count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

SimulationReport run_simulation(const SimConfig& cfg, Strategy strategy) {
  cfg.validate();

  const std::uint32_t n_nodes = cfg.node_count;
  EnergyMatrix energies = initial_energies(cfg);
  const std::vector<NodeId> queriers = select_queriers(cfg);
  Rng rng(derive_seed(cfg.seed, to_string(strategy)));

  SimulationReport report{
      .strategy = strategy,
      .config = cfg,
      .queriers = queriers,
      .created = 0,
      .per_node_success = std::vector<std::uint64_t>(n_nodes, 0),
      .per_node_load = std::vector<std::uint64_t>(n_nodes, 0),
      .totals = {},
      .per_slot = {},
      .initial_energies = energies,
      .final_energies = energies,
  };

  // Every other node is a candidate for each querier.
  std::vector<std::vector<NodeId>> candidates;
  candidates.reserve(queriers.size());
  for (NodeId q : queriers) {
    std::vector<NodeId> others;
    others.reserve(n_nodes - 1);
    for (NodeId n = 0; n < n_nodes; ++n) {
      if (n != q) others.push_back(n);
    }
    candidates.push_back(std::move(others));
  }

  std::vector<Query> queries;
  queries.reserve(static_cast<std::size_t>(cfg.slot_count) * queriers.size());
  std::vector<std::deque<std::size_t>> backlog(n_nodes);
  NetworkState state{.slot = 0, .accepted_this_slot = std::vector<std::uint32_t>(n_nodes, 0)};
  std::vector<bool> available(n_nodes, true);

  for (std::uint32_t slot = 0; slot < cfg.slot_count; ++slot) {
    state.slot = slot;
    std::fill(state.accepted_this_slot.begin(), state.accepted_this_slot.end(), 0u);
    available = available_view(state, cfg.capacity_per_slot);

    SlotReport sr{.created = 0,
                  .outcomes = {},
                  .node_success = std::vector<std::uint64_t>(n_nodes, 0),
                  .node_load = std::vector<std::uint64_t>(n_nodes, 0)};

    auto terminate = [&](Query& q, QueryStatus status) {
      q.resolve(status, slot);
      switch (status) {
        case QueryStatus::Success: ++sr.outcomes.success; break;
        case QueryStatus::Failure: ++sr.outcomes.failure; break;
        case QueryStatus::Lost: ++sr.outcomes.lost; break;
        case QueryStatus::Pending: break;
      }
    };

    auto accept = [&](Query& q, NodeId node) {
      if (++state.accepted_this_slot[node] >= cfg.capacity_per_slot) available[node] = false;
      const auto u = q.unit_field;
      const auto outcome = interaction_outcome(energies.at(node, u), energies.at(q.requester, u),
                                               cfg.risk, cfg.e_max, rng);
      if (outcome == Interaction::Success) {
        apply_energy_update_in_place(energies, q.requester, node, u, cfg.learning_rate);
        ++report.per_node_success[node];
        ++sr.node_success[node];
        terminate(q, QueryStatus::Success);
      } else {
        terminate(q, QueryStatus::Failure);
      }
    };

    // Backlogs are served oldest-first before new arrivals.
    for (NodeId node = 0; node < n_nodes; ++node) {
      auto& queue = backlog[node];
      while (!queue.empty() && state.accepted_this_slot[node] < cfg.capacity_per_slot) {
        const std::size_t idx = queue.front();
        queue.pop_front();
        accept(queries[idx], node);
      }
    }

    for (std::size_t qi = 0; qi < queriers.size(); ++qi) {
      const NodeId requester = queriers[qi];
      const std::size_t idx = queries.size();
      Query fresh;
      fresh.id = idx;
      fresh.requester = requester;
      fresh.unit_field = static_cast<UnitFieldId>(rng.uniform_index(cfg.unit_field_count));
      fresh.created_slot = slot;
      queries.push_back(fresh);
      ++sr.created;
      Query& q = queries.back();

      const SelectionContext ctx{.requester = requester,
                                 .unit_field = q.unit_field,
                                 .energies = energies,
                                 .candidates = candidates[qi],
                                 .availability = available,
                                 .rng = rng};
      NodeId target = 0;
      try {
        target = select(strategy, ctx);
      } catch (const NoAvailableNode&) {
        // Nobody can take it within the slot.
        terminate(q, QueryStatus::Lost);
        continue;
      } catch (const NoCandidates&) {
        // No peer holds usable knowledge.
        terminate(q, QueryStatus::Failure);
        continue;
      }

      q.target = target;
      ++report.per_node_load[target];
      ++sr.node_load[target];
      if (backlog[target].empty() &&
          state.accepted_this_slot[target] < cfg.capacity_per_slot) {
        accept(q, target);
      } else {
        backlog[target].push_back(idx);
      }
    }

    // Expire waiting queries; the last slot closes out everything still waiting.
    const bool last = slot + 1 == cfg.slot_count;
    for (auto& queue : backlog) {
      while (!queue.empty() &&
             (last || slot - queries[queue.front()].created_slot >= cfg.lost_after_slots)) {
        terminate(queries[queue.front()], QueryStatus::Lost);
        queue.pop_front();
      }
    }

    report.created += sr.created;
    report.totals.success += sr.outcomes.success;
    report.totals.failure += sr.outcomes.failure;
    report.totals.lost += sr.outcomes.lost;
    report.per_slot.push_back(std::move(sr));
  }

  report.final_energies = energies;
  return report;
}

double top_load_share(const SimulationReport& report, double fraction) {
  const auto& m = report.initial_energies;
  const std::size_t n = m.node_count();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::vector<Energy> level(n);
  for (NodeId i = 0; i < n; ++i) level[i] = m.mean_energy(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return level[a] > level[b]; });

  const auto top = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  std::uint64_t top_load = 0;
  for (std::size_t i = 0; i < std::min(top, n); ++i) top_load += report.per_node_load[order[i]];
  const std::uint64_t all = std::accumulate(report.per_node_load.begin(),
                                            report.per_node_load.end(), std::uint64_t{0});
  return ratio(top_load, all);
}

}  // namespace kfn
