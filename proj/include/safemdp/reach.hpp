#pragma once

#include <cstddef>
#include <span>
#include <variant>

#include "safemdp/mdp.hpp"
#include "safemdp/state_set.hpp"

namespace safemdp {

/// Certify s from a known state s' when value(s') - L * d(s, s') >= h.
struct LipschitzRule {
  double lipschitz;
};

/// Certify s from its own value alone: value(s) >= h. Models classifiers that
/// read the GP confidence interval of each state directly.
struct DirectRule {};

using SafetyRule = std::variant<LipschitzRule, DirectRule>;

/// Result of a fixpoint iteration. `iterations` counts operator applications,
/// including the final one that leaves the set unchanged.
struct Fixpoint {
  StateSet set;
  std::size_t iterations = 0;
};

/// S ∪ {s | ∃ s' ∈ S : r(s') - eps - L d(s, s') >= h}.
StateSet r_safe_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
                    double lipschitz, double h);
/// Same, with DirectRule meaning S ∪ {s | r(s) - eps >= h}.
StateSet r_safe_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
                    const SafetyRule& rule, double h);

/// S ∪ {f(s', a) | s' ∈ S, a ∈ A(s')}.
StateSet r_reach(const Mdp& mdp, const StateSet& base);

/// target ∪ {s ∈ through | ∃ a : f(s, a) ∈ target}: one step back into `target`
/// from a state of `through`.
StateSet r_ret_one(const Mdp& mdp, const StateSet& through, const StateSet& target);

/// Least fixpoint of r_ret_one: the states with a path inside `through` that
/// ends in `target`. Iterates in synchronous layers.
StateSet r_ret_fixpoint(const Mdp& mdp, const StateSet& through, const StateSet& target);
Fixpoint r_ret_fixpoint_traced(const Mdp& mdp, const StateSet& through, const StateSet& target);

/// R_safe(S) ∩ R_reach(S) ∩ R̄_ret(R_safe(S), S).
StateSet r_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
               double lipschitz, double h);
StateSet r_eps(const Mdp& mdp, const StateSet& base, std::span<const double> r, double eps,
               const SafetyRule& rule, double h);

/// Least fixpoint of r_eps above `seed`: the largest set an eps-accurate
/// explorer may classify as safe starting from `seed`.
StateSet r_eps_fixpoint(const Mdp& mdp, const StateSet& seed, std::span<const double> r,
                        double eps, double lipschitz, double h);
StateSet r_eps_fixpoint(const Mdp& mdp, const StateSet& seed, std::span<const double> r,
                        double eps, const SafetyRule& rule, double h);
Fixpoint r_eps_fixpoint_traced(const Mdp& mdp, const StateSet& seed, std::span<const double> r,
                               double eps, const SafetyRule& rule, double h);

}  // namespace safemdp
