#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kfn/core_model.hpp"
#include "kfn/rng.hpp"

namespace kfn {

enum class Strategy { Random, Greedy, Generous, Selfish, Conscious };

inline constexpr std::array<Strategy, 5> kAllStrategies{
    Strategy::Random, Strategy::Greedy, Strategy::Generous, Strategy::Selfish,
    Strategy::Conscious};

// Stable identifiers: "random", "greedy", "generous", "selfish", "conscious".
std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;

// Inputs of one routing decision. `availability` is indexed by node id and
// must cover every candidate; only the conscious strategy reads it. The rng
// stream belongs to the caller and is advanced by the random-choice
// strategies only.
struct SelectionContext {
  NodeId requester;
  UnitFieldId unit_field;
  const EnergyMatrix& energies;
  std::span<const NodeId> candidates;
  const std::vector<bool>& availability;
  Rng& rng;
};

// All selectors throw NoCandidates when ctx.candidates is empty.
NodeId select_random(const SelectionContext& ctx);
// Highest energy in the unit field; ties go to the lowest node id.
NodeId select_greedy(const SelectionContext& ctx);
// Lowest energy; ties go to the lowest node id.
NodeId select_generous(const SelectionContext& ctx);
// Uniform among candidates strictly above the requester, falling back to
// candidates at exactly the requester's energy. Throws NoCandidates when
// neither set has members.
NodeId select_selfish(const SelectionContext& ctx);
// Greedy restricted to available candidates. Throws NoAvailableNode.
NodeId select_conscious(const SelectionContext& ctx);

NodeId select(Strategy s, const SelectionContext& ctx);

}  // namespace kfn
