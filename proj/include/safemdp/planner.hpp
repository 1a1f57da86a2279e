#pragma once

#include <optional>
#include <vector>

#include "safemdp/mdp.hpp"
#include "safemdp/state_set.hpp"

namespace safemdp {

struct PathPlan {
  std::vector<ActionLabel> actions;
  /// actions.size() + 1 entries, starting at the origin.
  std::vector<StateId> states;

  std::size_t hops() const noexcept { return actions.size(); }
};

/// Minimum-hop path from `from` to `to` that never leaves `allowed`. Among
/// shortest paths the lexicographically smallest action sequence is returned.
/// Throws PreconditionError if an endpoint is outside `allowed` and NoPathError
/// if `to` cannot be reached.
PathPlan shortest_safe_path(const Mdp& mdp, const StateSet& allowed, StateId from, StateId to);

/// Shortest path of at least one hop from `s` back to `s` inside `allowed`,
/// or nullopt if no such cycle exists.
std::optional<PathPlan> shortest_safe_cycle(const Mdp& mdp, const StateSet& allowed, StateId s);

}  // namespace safemdp
