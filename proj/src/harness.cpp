#include "kfn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include "kfn/errors.hpp"

namespace kfn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

json effective(const Scenario& scn, const SimConfig& sim) {
  json p = scn.effective_parameters();
  p["sim"]["seed"] = sim.seed;
  return p;
}

// First CSV line: scenario digest and effective parameters.
std::string csv_preamble(const Scenario& scn, const json& params) {
  return "# scenario_sha256=" + scn.digest + " parameters=" + params.dump() + "\n";
}

json totals_json(const SimulationReport& r) {
  return json{{"strategy", std::string(to_string(r.strategy))},
              {"created", r.created},
              {"success", r.totals.success},
              {"failure", r.totals.failure},
              {"lost", r.totals.lost},
              {"success_prop", r.totals.success_prop()},
              {"failure_prop", r.totals.failure_prop()},
              {"lost_prop", r.totals.lost_prop()},
              {"top_decile_load_share", top_load_share(r, 0.1)}};
}

const SimulationReport* find_report(const std::vector<SimulationReport>& reports, Strategy s) {
  auto it = std::find_if(reports.begin(), reports.end(),
                         [&](const SimulationReport& r) { return r.strategy == s; });
  return it == reports.end() ? nullptr : &*it;
}

json derived_assertions(const std::vector<SimulationReport>& reports) {
  json a = json::object();
  bool sums_ok = true;
  for (const auto& r : reports) {
    const double sum = r.totals.success_prop() + r.totals.failure_prop() + r.totals.lost_prop();
    sums_ok = sums_ok && (r.created == 0 || std::abs(sum - 1.0) <= 1e-9) &&
              r.totals.total() == r.created;
  }
  a["outcomes_conserved"] = sums_ok;

  if (const auto* c = find_report(reports, Strategy::Conscious)) {
    a["conscious_lost"] = c->totals.lost;
    a["conscious_lost_zero"] = c->totals.lost == 0;
    if (reports.size() > 1) {
      a["conscious_highest_success"] =
          std::all_of(reports.begin(), reports.end(), [&](const SimulationReport& r) {
            return &r == c || c->totals.success_prop() > r.totals.success_prop();
          });
    }
  }
  const auto* g = find_report(reports, Strategy::Greedy);
  const auto* rnd = find_report(reports, Strategy::Random);
  if (g && rnd) {
    const double rs = top_load_share(*rnd, 0.1);
    a["greedy_to_random_top_decile_load_ratio"] =
        rs > 0.0 ? json(top_load_share(*g, 0.1) / rs) : json(nullptr);
  }
  return a;
}

SweepResult write_reports(const Scenario& scn, const SimConfig& sim,
                          std::vector<SimulationReport> reports, const json& overrides,
                          const fs::path& out_dir) {
  prepare_dir(out_dir);
  const json params = effective(scn, sim);
  const std::string preamble = csv_preamble(scn, params);

  std::ostringstream per_node;
  per_node << preamble << "strategy,node,energy_initial,energy_final,successes,load\n";
  std::ostringstream per_slot;
  per_slot << preamble << "strategy,slot,created,success,failure,lost\n";
  std::ostringstream totals;
  totals << preamble
         << "strategy,success,failure,lost,success_prop,failure_prop,lost_prop\n";

  json strategies = json::array();
  for (const auto& r : reports) {
    const std::string name(to_string(r.strategy));
    for (NodeId n = 0; n < r.per_node_load.size(); ++n) {
      per_node << name << ',' << n << ',' << format_real(r.initial_energies.mean_energy(n)) << ','
               << format_real(r.final_energies.mean_energy(n)) << ',' << r.per_node_success[n]
               << ',' << r.per_node_load[n] << '\n';
    }
    for (std::size_t s = 0; s < r.per_slot.size(); ++s) {
      const auto& sr = r.per_slot[s];
      per_slot << name << ',' << s << ',' << sr.created << ',' << sr.outcomes.success << ','
               << sr.outcomes.failure << ',' << sr.outcomes.lost << '\n';
    }
    totals << name << ',' << r.totals.success << ',' << r.totals.failure << ',' << r.totals.lost
           << ',' << format_real(r.totals.success_prop()) << ','
           << format_real(r.totals.failure_prop()) << ',' << format_real(r.totals.lost_prop())
           << '\n';
    strategies.push_back(totals_json(r));
  }

  json summary{{"scenario_sha256", scn.digest},
               {"parameters", params},
               {"overrides", overrides},
               {"strategies", std::move(strategies)},
               {"assertions", derived_assertions(reports)}};

  write_file(out_dir / scn.outputs.per_node, per_node.str());
  write_file(out_dir / scn.outputs.per_slot, per_slot.str());
  write_file(out_dir / scn.outputs.totals, totals.str());
  write_file(out_dir / scn.outputs.summary, summary.dump(2) + "\n");
  return SweepResult{std::move(reports), std::move(summary)};
}

std::vector<SimulationReport> run_all(const SimConfig& sim, const std::vector<Strategy>& list) {
  std::vector<std::future<SimulationReport>> jobs;
  jobs.reserve(list.size());
  for (Strategy s : list) {
    jobs.push_back(std::async(std::launch::async, [sim, s] { return run_simulation(sim, s); }));
  }
  std::vector<SimulationReport> reports;
  reports.reserve(jobs.size());
  for (auto& j : jobs) reports.push_back(j.get());
  return reports;
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

SweepResult run_sweep(const Scenario& scn, const fs::path& out_dir) {
  return write_reports(scn, scn.sim, run_all(scn.sim, scn.strategies), json::object(), out_dir);
}

SweepResult run_simulate(const Scenario& scn, const SimulateOptions& opts,
                         const fs::path& out_dir) {
  SimConfig sim = scn.sim;
  json overrides = json::object();
  if (opts.seed) {
    sim.seed = *opts.seed;
    overrides["seed"] = *opts.seed;
  }
  const Strategy strategy = opts.strategy.value_or(scn.strategies.front());
  if (opts.strategy) overrides["strategy"] = std::string(to_string(strategy));
  return write_reports(scn, sim, {run_simulation(sim, strategy)}, overrides, out_dir);
}

Calendar random_task_calendar(const TimeInterval& window, double busy_fraction, Rng& rng) {
  Calendar cal;
  if (busy_fraction <= 0.0) return cal;
  // Busy runs average 2.5 ticks; free runs are single ticks drawn with the
  // complementary odds, which puts the busy share near busy_fraction.
  const double start_odds = busy_fraction / (busy_fraction + 2.5 * (1.0 - busy_fraction));
  Tick cursor = window.start();
  while (cursor < window.end()) {
    if (rng.uniform() < start_odds) {
      const Tick len = 1 + static_cast<Tick>(rng.uniform_index(4));
      const Tick end = std::min(window.end(), cursor + len);
      cal.insert(TimeInterval::make(cursor, end), BusyKind::Task);
      cursor = end;
    } else {
      ++cursor;
    }
  }
  return cal;
}

FlowDemoResult run_flow_demo(const Scenario& scn, const FlowDemoRequest& req,
                             const fs::path& out_dir) {
  const SimConfig& sim = scn.sim;
  const SchedulerParams& sp = scn.scheduler;
  if (req.recipient >= sim.node_count) {
    throw ValidationError("recipient", "node id outside the network");
  }
  if (req.unit_field >= sim.unit_field_count) {
    throw ValidationError("unit_field", "unit field outside the knowledge space");
  }
  if (req.time_constraint <= 0) throw ValidationError("tc", "must be positive");

  EnergyMatrix energies = initial_energies(sim);
  const auto window = TimeInterval::make(sp.now, sp.now + req.time_constraint);

  Rng cal_rng(derive_seed(sim.seed, "calendars"));
  std::vector<Calendar> calendars;
  calendars.reserve(sim.node_count);
  for (NodeId n = 0; n < sim.node_count; ++n) {
    calendars.push_back(random_task_calendar(window, sp.busy_fraction, cal_rng));
  }

  ErtStore erts(sim.node_count, sp.alpha, sp.default_ert);
  Rng ert_rng(derive_seed(sim.seed, "erts"));
  for (NodeId n = 0; n < sim.node_count; ++n) {
    for (std::uint32_t i = 0; i < sp.ert_observations; ++i) {
      erts.record(n, ert_rng.uniform(0.5, 1.5) * sp.default_ert);
    }
  }

  std::vector<NodeId> candidates;
  for (NodeId n = 0; n < sim.node_count; ++n) {
    if (n != req.recipient) candidates.push_back(n);
  }
  if (sp.candidate_pool == CandidatePool::Sample && sp.candidate_pool_size < candidates.size()) {
    Rng pool_rng(derive_seed(sim.seed, "candidate-pool"));
    for (std::size_t i = 0; i < sp.candidate_pool_size; ++i) {
      const auto j = i + pool_rng.uniform_index(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(sp.candidate_pool_size);
    std::sort(candidates.begin(), candidates.end());
  }

  const ScheduleRequest request{.recipient = req.recipient,
                                .unit_field = req.unit_field,
                                .knowledge_link = sp.knowledge_link,
                                .problem = sp.problem,
                                .now = sp.now,
                                .time_constraint = req.time_constraint,
                                .candidates = candidates};
  FlowScheduler scheduler(calendars);
  ControlMessage msg = scheduler.find_path(request, energies, erts);
  FlowList flow = scheduler.history().back();

  std::map<NodeId, RoutingAgent> agents;
  for (const Hop& h : msg.hops) agents.emplace(h.node, RoutingAgent(h.node));
  agents.emplace(msg.recipient, RoutingAgent(msg.recipient));
  Rng exec_rng(derive_seed(sim.seed, "flow-execution"));
  const ImprovementEnv env{.energies = energies, .erts = erts, .beta = sp.beta};
  FlowOutcome outcome = execute_flow(
      msg,
      KnowledgeItem{.link = sp.knowledge_link,
                    .unit_field = req.unit_field,
                    .quality = sp.initial_quality},
      agents, env, sp.now, exec_rng);

  prepare_dir(out_dir);
  const std::string wire = encode_control_message(msg);

  json hops = json::array();
  for (const Hop& h : msg.hops) {
    hops.push_back(json{{"node", h.node},
                        {"access_start", h.access_start},
                        {"access_end", h.access_end},
                        {"energy", energies.at(h.node, req.unit_field)},
                        {"ert", erts.ert(h.node)},
                        {"busy_ticks_before_flow",
                         std::accumulate(calendars[h.node].entries().begin(),
                                         calendars[h.node].entries().end(), Tick{0},
                                         [](Tick acc, const CalendarEntry& e) {
                                           return acc + e.interval.length();
                                         })}});
  }
  json log = json::array();
  for (const HopRecord& r : outcome.hop_log) {
    const char* kind = r.outcome == HopOutcome::Finished  ? "finished"
                       : r.outcome == HopOutcome::Aborted ? "aborted"
                                                          : "passed_through";
    log.push_back(json{{"node", r.node},
                       {"outcome", kind},
                       {"started", r.started ? json(*r.started) : json(nullptr)},
                       {"ended", r.ended},
                       {"quality_before", r.quality_before},
                       {"quality_after", r.quality_after}});
  }
  const json doc{
      {"scenario_sha256", scn.digest},
      {"parameters", scn.effective_parameters()},
      {"request",
       {{"recipient", req.recipient},
        {"recipient_energy", energies.at(req.recipient, req.unit_field)},
        {"unit_field", req.unit_field},
        {"tc", req.time_constraint},
        {"now", sp.now},
        {"candidate_count", candidates.size()}}},
      {"control_message", wire},
      {"hops", std::move(hops)},
      {"outcome",
       {{"delivered", outcome.delivered},
        {"delivery_time", outcome.delivery_time},
        {"deadline", msg.deadline},
        {"initial_quality", outcome.initial_quality},
        {"final_quality", outcome.final_quality},
        {"hop_log", std::move(log)}}},
      {"checks",
       {{"hops_ascending_energy", flow_order_principle(flow, energies, req.unit_field)},
        {"delivered_by_deadline", outcome.delivered}}}};

  write_file(out_dir / scn.outputs.control_message, wire);
  write_file(out_dir / scn.outputs.flow, doc.dump(2) + "\n");

  return FlowDemoResult{std::move(energies), std::move(calendars), std::move(flow),
                        std::move(msg), std::move(outcome)};
}

}  // namespace kfn
