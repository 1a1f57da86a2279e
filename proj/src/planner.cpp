#include "safemdp/planner.hpp"

#include <deque>
#include <limits>
#include <string>

#include "safemdp/errors.hpp"

namespace safemdp {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

/// Hop distance to `to` for every allowed state; unit edge weights make
/// Dijkstra a breadth-first sweep over predecessors.
std::vector<std::size_t> distances_to(const Mdp& mdp, const StateSet& allowed, StateId to) {
  std::vector<std::size_t> dist(mdp.num_states(), kUnreached);
  std::deque<StateId> frontier{to};
  dist[to] = 0;
  while (!frontier.empty()) {
    const StateId x = frontier.front();
    frontier.pop_front();
    for (StateId p : mdp.predecessors(x)) {
      if (allowed.contains(p) && dist[p] == kUnreached) {
        dist[p] = dist[x] + 1;
        frontier.push_back(p);
      }
    }
  }
  return dist;
}

/// Follows strictly decreasing distances, taking the smallest action label at each step.
void descend(const Mdp& mdp, const std::vector<std::size_t>& dist, PathPlan& plan) {
  StateId s = plan.states.back();
  while (dist[s] != 0) {
    for (const auto& t : mdp.actions(s)) {
      if (dist[t.successor] != kUnreached && dist[t.successor] + 1 == dist[s]) {
        plan.actions.push_back(t.action);
        plan.states.push_back(t.successor);
        s = t.successor;
        break;
      }
    }
  }
}

void check_endpoint(const Mdp& mdp, const StateSet& allowed, StateId s, const char* name) {
  if (s >= mdp.num_states() || !allowed.contains(s)) {
    throw PreconditionError(std::string(name) + " state " + std::to_string(s) +
                            " is not in the allowed set");
  }
}

}  // namespace

PathPlan shortest_safe_path(const Mdp& mdp, const StateSet& allowed, StateId from, StateId to) {
  if (allowed.universe() != mdp.num_states()) throw DomainError("allowed set has the wrong universe");
  check_endpoint(mdp, allowed, from, "origin");
  check_endpoint(mdp, allowed, to, "target");
  const auto dist = distances_to(mdp, allowed, to);
  if (dist[from] == kUnreached) {
    throw NoPathError("no path from " + std::to_string(from) + " to " + std::to_string(to) +
                      " inside the allowed set");
  }
  PathPlan plan{{}, {from}};
  descend(mdp, dist, plan);
  return plan;
}

std::optional<PathPlan> shortest_safe_cycle(const Mdp& mdp, const StateSet& allowed, StateId s) {
  if (allowed.universe() != mdp.num_states()) throw DomainError("allowed set has the wrong universe");
  check_endpoint(mdp, allowed, s, "cycle");
  const auto dist = distances_to(mdp, allowed, s);
  std::optional<Transition> first;
  for (const auto& t : mdp.actions(s)) {
    if (!allowed.contains(t.successor) || dist[t.successor] == kUnreached) continue;
    if (!first || dist[t.successor] < dist[first->successor]) first = t;
  }
  if (!first) return std::nullopt;
  PathPlan plan{{first->action}, {s, first->successor}};
  descend(mdp, dist, plan);
  return plan;
}

}  // namespace safemdp
