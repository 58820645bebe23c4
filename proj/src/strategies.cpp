#include "kfn/strategies.hpp"

#include "kfn/errors.hpp"

namespace kfn {

namespace {

void require_candidates(const SelectionContext& ctx) {
  if (ctx.candidates.empty()) throw NoCandidates("no candidate nodes to select from");
}

// Extreme by `better`, scanning candidates; ties resolved to the lowest id
// regardless of candidate order.
template <class Better, class Accept>
std::optional<NodeId> extreme(const SelectionContext& ctx, Better better, Accept accept) {
  std::optional<NodeId> best;
  Energy best_e = 0.0;
  for (NodeId n : ctx.candidates) {
    if (!accept(n)) continue;
    const Energy e = ctx.energies.at(n, ctx.unit_field);
    if (!best || better(e, best_e) || (e == best_e && n < *best)) {
      best = n;
      best_e = e;
    }
  }
  return best;
}

NodeId pick_uniform(Rng& rng, const std::vector<NodeId>& pool) {
  return pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))];
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Greedy: return "greedy";
    case Strategy::Generous: return "generous";
    case Strategy::Selfish: return "selfish";
    case Strategy::Conscious: return "conscious";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

NodeId select_random(const SelectionContext& ctx) {
  require_candidates(ctx);
  return ctx.candidates[static_cast<std::size_t>(ctx.rng.uniform_index(ctx.candidates.size()))];
}

NodeId select_greedy(const SelectionContext& ctx) {
  require_candidates(ctx);
  return *extreme(
      ctx, [](Energy a, Energy b) { return a > b; }, [](NodeId) { return true; });
}

NodeId select_generous(const SelectionContext& ctx) {
  require_candidates(ctx);
  return *extreme(
      ctx, [](Energy a, Energy b) { return a < b; }, [](NodeId) { return true; });
}

NodeId select_selfish(const SelectionContext& ctx) {
  require_candidates(ctx);
  const Energy own = ctx.energies.at(ctx.requester, ctx.unit_field);
  std::vector<NodeId> higher;
  std::vector<NodeId> equal;
  for (NodeId n : ctx.candidates) {
    const Energy e = ctx.energies.at(n, ctx.unit_field);
    if (e > own) {
      higher.push_back(n);
    } else if (e == own) {
      equal.push_back(n);
    }
  }
  if (!higher.empty()) return pick_uniform(ctx.rng, higher);
  if (!equal.empty()) return pick_uniform(ctx.rng, equal);
  throw NoCandidates("no candidate with energy at or above the requester's");
}

NodeId select_conscious(const SelectionContext& ctx) {
  require_candidates(ctx);
  auto best = extreme(
      ctx, [](Energy a, Energy b) { return a > b; },
      [&](NodeId n) { return n < ctx.availability.size() && ctx.availability[n]; });
  if (!best) throw NoAvailableNode("every candidate is at capacity");
  return *best;
}

NodeId select(Strategy s, const SelectionContext& ctx) {
  switch (s) {
    case Strategy::Random: return select_random(ctx);
    case Strategy::Greedy: return select_greedy(ctx);
    case Strategy::Generous: return select_generous(ctx);
    case Strategy::Selfish: return select_selfish(ctx);
    case Strategy::Conscious: return select_conscious(ctx);
  }
  throw NoCandidates("unknown strategy");
}

}  // namespace kfn
