#include "safemdp/reach.hpp"

#include <string>
#include <vector>

#include "safemdp/errors.hpp"

namespace safemdp {

namespace {

void check_universe(const Mdp& mdp, const StateSet& set, const char* name) {
  if (set.universe() != mdp.num_states()) {
    throw DomainError(std::string(name) + " is a set over " + std::to_string(set.universe()) +
                      " states, the MDP has " + std::to_string(mdp.num_states()));
  }
}

void check_values(const Mdp& mdp, std::span<const double> r) {
  if (r.size() != mdp.num_states()) {
    throw DomainError("safety values: expected " + std::to_string(mdp.num_states()) +
                      " entries, got " + std::to_string(r.size()));
  }
}

}  // namespace

StateSet r_safe_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
                    const SafetyRule& rule, double h) {
  check_universe(mdp, base, "base");
  check_values(mdp, r);
  StateSet out = base;
  if (base.empty()) return out;
  const std::size_t n = mdp.num_states();

  if (std::holds_alternative<DirectRule>(rule)) {
    for (StateId s = 0; s < n; ++s) {
      if (r[s] - eps >= h) out.insert(s);
    }
    return out;
  }

  const double lipschitz = std::get<LipschitzRule>(rule).lipschitz;
  // Only witnesses with r(s') - eps >= h can certify anything.
  std::vector<StateId> witnesses;
  base.for_each([&](StateId w) {
    if (r[w] - eps >= h) witnesses.push_back(w);
  });
  for (StateId s = 0; s < n; ++s) {
    if (out.contains(s)) continue;
    for (StateId w : witnesses) {
      if (r[w] - eps - lipschitz * mdp.distance(s, w) >= h) {
        out.insert(s);
        break;
      }
    }
  }
  return out;
}

StateSet r_safe_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
                    double lipschitz, double h) {
  return r_safe_eps(mdp, base, r, eps, SafetyRule{LipschitzRule{lipschitz}}, h);
}

StateSet r_reach(const Mdp& mdp, const StateSet& base) {
  check_universe(mdp, base, "base");
  StateSet out = base;
  base.for_each([&](StateId s) {
    for (const auto& t : mdp.actions(s)) out.insert(t.successor);
  });
  return out;
}

StateSet r_ret_one(const Mdp& mdp, const StateSet& through, const StateSet& target) {
  check_universe(mdp, through, "through");
  check_universe(mdp, target, "target");
  StateSet out = target;
  target.for_each([&](StateId x) {
    for (StateId p : mdp.predecessors(x)) {
      if (through.contains(p)) out.insert(p);
    }
  });
  return out;
}

Fixpoint r_ret_fixpoint_traced(const Mdp& mdp, const StateSet& through, const StateSet& target) {
  check_universe(mdp, through, "through");
  check_universe(mdp, target, "target");
  Fixpoint result{target, 0};
  // Layer k holds the states first added by the k-th application of r_ret_one.
  std::vector<StateId> layer = target.members();
  std::vector<StateId> next;
  while (true) {
    ++result.iterations;
    next.clear();
    for (StateId x : layer) {
      for (StateId p : mdp.predecessors(x)) {
        if (through.contains(p) && !result.set.contains(p)) {
          result.set.insert(p);
          next.push_back(p);
        }
      }
    }
    if (next.empty()) break;
    layer.swap(next);
  }
  return result;
}

StateSet r_ret_fixpoint(const Mdp& mdp, const StateSet& through, const StateSet& target) {
  return r_ret_fixpoint_traced(mdp, through, target).set;
}

StateSet r_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
               const SafetyRule& rule, double h) {
  const StateSet safe = r_safe_eps(mdp, base, r, eps, rule, h);
  return safe & r_reach(mdp, base) & r_ret_fixpoint(mdp, safe, base);
}

StateSet r_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
               double lipschitz, double h) {
  return r_eps(mdp, base, r, eps, SafetyRule{LipschitzRule{lipschitz}}, h);
}

Fixpoint r_eps_fixpoint_traced(const Mdp& mdp, const StateSet& seed, std::span<const double> r,
                               double eps, const SafetyRule& rule, double h) {
  Fixpoint result{seed, 0};
  while (true) {
    ++result.iterations;
    StateSet next = r_eps(mdp, result.set, r, eps, rule, h);
    if (next == result.set) break;
    result.set = std::move(next);
  }
  return result;
}

StateSet r_eps_fixpoint(const Mdp& mdp, const StateSet& seed, std::span<const double> r,
                        double eps, const SafetyRule& rule, double h) {
  return r_eps_fixpoint_traced(mdp, seed, r, eps, rule, h).set;
}

StateSet r_eps_fixpoint(const Mdp& mdp, const StateSet& seed, std::span<const double> r,
                        double eps, double lipschitz, double h) {
  return r_eps_fixpoint(mdp, seed, r, eps, SafetyRule{LipschitzRule{lipschitz}}, h);
}

}  // namespace safemdp
