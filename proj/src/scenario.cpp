#include "kfn/scenario.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "kfn/errors.hpp"

namespace kfn {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Reads one JSON object, tracking which keys were consumed so that anything
// left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path, std::vector<std::string>& defaults)
      : obj_(obj), path_(std::move(path)), defaults_(defaults) {
    if (!obj_.is_object()) throw ValidationError(path_.empty() ? "$" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ValidationError(join(path_, key), "required field missing");
    return *v;
  }

  std::uint64_t unsigned_int(const std::string& key, const json& v) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      throw ValidationError(join(path_, key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint32_t u32(const std::string& key, const json& v) {
    const auto x = unsigned_int(key, v);
    if (x > std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError(join(path_, key), "value too large");
    }
    return static_cast<std::uint32_t>(x);
  }

  double real(const std::string& key, const json& v) {
    if (!v.is_number()) throw ValidationError(join(path_, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(join(path_, key), "expected a finite number");
    return x;
  }

  std::string text(const std::string& key, const json& v) {
    if (!v.is_string()) throw ValidationError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  // Reads an optional field through `read`, recording a default when absent.
  template <class T, class Read>
  void optional(const std::string& key, T& out, Read read) {
    if (const json* v = find(key)) {
      out = read(key, *v);
    } else {
      defaults_.push_back(join(path_, key));
    }
  }

  void check(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) throw ValidationError(join(path_, key), what);
  }

  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ValidationError(join(path_, it.key()), "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& defaults_;
  std::set<std::string> seen_;
};

SimConfig read_sim(const json& obj, std::vector<std::string>& defaults) {
  ObjectReader r(obj, "sim", defaults);
  SimConfig c;
  auto u32 = [&](const std::string& k, const json& v) { return r.u32(k, v); };
  auto real = [&](const std::string& k, const json& v) { return r.real(k, v); };

  c.node_count = u32("node_count", r.require("node_count"));
  c.querier_count = u32("querier_count", r.require("querier_count"));
  c.capacity_per_slot = u32("capacity_per_slot", r.require("capacity_per_slot"));
  c.slot_count = u32("slot_count", r.require("slot_count"));
  c.seed = r.unsigned_int("seed", r.require("seed"));
  r.optional("risk", c.risk, real);
  r.optional("learning_rate", c.learning_rate, real);
  r.optional("lost_after_slots", c.lost_after_slots, u32);
  r.optional("e_max", c.e_max, real);
  r.optional("unit_field_count", c.unit_field_count, u32);
  r.reject_unknown();

  r.check(c.node_count >= 1, "node_count", "must be at least 1");
  r.check(c.querier_count <= c.node_count, "querier_count", "must not exceed node_count");
  r.check(c.capacity_per_slot >= 1, "capacity_per_slot", "must be at least 1");
  r.check(c.slot_count >= 1, "slot_count", "must be at least 1");
  r.check(c.risk >= 0.0 && c.risk < 1.0, "risk", "must lie in [0, 1)");
  r.check(c.learning_rate > 0.0 && c.learning_rate <= 1.0, "learning_rate", "must lie in (0, 1]");
  r.check(c.lost_after_slots >= 1, "lost_after_slots", "must be at least 1");
  r.check(c.e_max > 0.0, "e_max", "must be positive");
  r.check(c.unit_field_count >= 1, "unit_field_count", "must be at least 1");
  return c;
}

SchedulerParams read_scheduler(const json* obj, std::vector<std::string>& defaults) {
  SchedulerParams p;
  if (!obj) {
    defaults.push_back("scheduler");
    return p;
  }
  ObjectReader r(*obj, "scheduler", defaults);
  auto u32 = [&](const std::string& k, const json& v) { return r.u32(k, v); };
  auto real = [&](const std::string& k, const json& v) { return r.real(k, v); };
  auto text = [&](const std::string& k, const json& v) { return r.text(k, v); };

  r.optional("alpha", p.alpha, real);
  r.optional("default_ert", p.default_ert, real);
  r.optional("beta", p.beta, real);
  std::string pool = "all";
  r.optional("candidate_pool", pool, text);
  r.optional("candidate_pool_size", p.candidate_pool_size, u32);
  r.optional("busy_fraction", p.busy_fraction, real);
  r.optional("ert_observations", p.ert_observations, u32);
  r.optional("now", p.now, [&](const std::string& k, const json& v) {
    return static_cast<Tick>(r.u32(k, v));
  });
  r.optional("initial_quality", p.initial_quality, real);
  r.optional("knowledge_link", p.knowledge_link, text);
  r.optional("problem", p.problem, text);
  r.reject_unknown();

  r.check(p.alpha > 0.0 && p.alpha <= 1.0, "alpha", "must lie in (0, 1]");
  r.check(p.default_ert > 0.0, "default_ert", "must be positive");
  r.check(p.beta > 0.0 && p.beta <= 1.0, "beta", "must lie in (0, 1]");
  r.check(pool == "all" || pool == "sample", "candidate_pool", "must be \"all\" or \"sample\"");
  p.candidate_pool = pool == "all" ? CandidatePool::All : CandidatePool::Sample;
  r.check(p.candidate_pool == CandidatePool::All || p.candidate_pool_size >= 1,
          "candidate_pool_size", "must be at least 1 when sampling");
  r.check(p.busy_fraction >= 0.0 && p.busy_fraction < 1.0, "busy_fraction", "must lie in [0, 1)");
  r.check(p.initial_quality >= 0.0 && p.initial_quality <= 1.0, "initial_quality",
          "must lie in [0, 1]");
  return p;
}

std::vector<Strategy> read_strategies(const json* v, std::vector<std::string>& defaults) {
  if (!v) {
    defaults.push_back("strategies");
    return {kAllStrategies.begin(), kAllStrategies.end()};
  }
  if (!v->is_array() || v->empty()) {
    throw ValidationError("strategies", "expected a non-empty array of strategy names");
  }
  std::vector<Strategy> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const std::string where = "strategies[" + std::to_string(i) + "]";
    const json& name = (*v)[i];
    if (!name.is_string()) throw ValidationError(where, "expected a strategy name");
    const auto s = parse_strategy(name.get<std::string>());
    if (!s) throw ValidationError(where, "unknown strategy \"" + name.get<std::string>() + "\"");
    if (std::find(out.begin(), out.end(), *s) != out.end()) {
      throw ValidationError(where, "strategy listed twice");
    }
    out.push_back(*s);
  }
  return out;
}

OutputPaths read_outputs(const json* obj, std::vector<std::string>& defaults) {
  OutputPaths o;
  if (!obj) {
    defaults.push_back("outputs");
    return o;
  }
  ObjectReader r(*obj, "outputs", defaults);
  auto file = [&](const std::string& k, const json& v) {
    std::string name = r.text(k, v);
    r.check(!name.empty() && name.find('/') == std::string::npos && name != "." && name != "..",
            k, "must be a plain file name");
    return name;
  };
  r.optional("per_node", o.per_node, file);
  r.optional("per_slot", o.per_slot, file);
  r.optional("totals", o.totals, file);
  r.optional("summary", o.summary, file);
  r.optional("flow", o.flow, file);
  r.optional("control_message", o.control_message, file);
  r.reject_unknown();
  return o;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ParseError(ex.what());
  }

  Scenario s;
  s.digest = sha256_hex(text);
  ObjectReader root(doc, "", s.defaults_applied);

  const json& version = root.require("version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kScenarioVersion) {
    throw ValidationError("version", "unsupported scenario version (expected " +
                                         std::to_string(kScenarioVersion) + ")");
  }
  s.sim = read_sim(root.require("sim"), s.defaults_applied);
  s.scheduler = read_scheduler(root.find("scheduler"), s.defaults_applied);
  s.strategies = read_strategies(root.find("strategies"), s.defaults_applied);
  s.outputs = read_outputs(root.find("outputs"), s.defaults_applied);
  root.reject_unknown();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read scenario " + path.string());
  return parse_scenario(buf.str());
}

nlohmann::json Scenario::effective_parameters() const {
  json strategies_json = json::array();
  for (Strategy st : strategies) strategies_json.push_back(std::string(to_string(st)));
  return json{
      {"version", version},
      {"sim",
       {{"node_count", sim.node_count},
        {"querier_count", sim.querier_count},
        {"capacity_per_slot", sim.capacity_per_slot},
        {"slot_count", sim.slot_count},
        {"risk", sim.risk},
        {"learning_rate", sim.learning_rate},
        {"lost_after_slots", sim.lost_after_slots},
        {"e_max", sim.e_max},
        {"unit_field_count", sim.unit_field_count},
        {"seed", sim.seed}}},
      {"scheduler",
       {{"alpha", scheduler.alpha},
        {"default_ert", scheduler.default_ert},
        {"beta", scheduler.beta},
        {"candidate_pool", scheduler.candidate_pool == CandidatePool::All ? "all" : "sample"},
        {"candidate_pool_size", scheduler.candidate_pool_size},
        {"busy_fraction", scheduler.busy_fraction},
        {"ert_observations", scheduler.ert_observations},
        {"now", scheduler.now},
        {"initial_quality", scheduler.initial_quality},
        {"knowledge_link", scheduler.knowledge_link},
        {"problem", scheduler.problem}}},
      {"strategies", std::move(strategies_json)},
      {"outputs",
       {{"per_node", outputs.per_node},
        {"per_slot", outputs.per_slot},
        {"totals", outputs.totals},
        {"summary", outputs.summary},
        {"flow", outputs.flow},
        {"control_message", outputs.control_message}}},
      {"defaults_applied", defaults_applied},
      // Fixed modelling choices, echoed so outputs are self-describing.
      {"model",
       {{"success_probability", "(1 - risk) * (responder_e - requester_e) / e_max"},
        {"energy_update", "requester += learning_rate * (responder_e - requester_e)"},
        {"selfish_choice", "uniform over strictly higher, else uniform over equal"},
        {"tie_break", "lowest node id"},
        {"lost_rule", "waiting lost_after_slots slots after creation, or at end of run"},
        {"backlog_order", "oldest first, before new arrivals"},
        {"quality_gain", "q + beta * ((node_e - recipient_e) / e_max) * (1 - q)"},
        {"improvement_time", "ceil(ert * U[0.7, 1.3))"}}},
  };
}

}  // namespace kfn
