#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "safemdp/gp.hpp"
#include "safemdp/mdp.hpp"
#include "safemdp/reach.hpp"
#include "safemdp/state_set.hpp"

namespace safemdp {

/// Classification of one iteration: S_t, its ergodic part, and the expanders.
struct SafeSets {
  StateSet safe;
  StateSet ergodic;
  StateSet expanders;
  /// g_t(s); zero outside `ergodic`.
  std::vector<std::size_t> expander_counts;
  std::vector<double> widths;
};

/// LipschitzRule classifies through witnesses in the previous ergodic set;
/// DirectRule reads each lower bound on its own.
using ClassifierMode = SafetyRule;

/// S_t. Always contains `prev_ergodic`.
StateSet classify_safe(const Mdp& mdp, const ConfidenceBands& bands, const StateSet& prev_ergodic,
                       double h, const ClassifierMode& mode);

/// Ŝ_t = S_t ∩ R_reach(Ŝ_{t-1}) ∩ R̄_ret(S_t, Ŝ_{t-1}).
/// Throws PreconditionError unless prev_ergodic ⊆ safe.
StateSet ergodic_safe(const Mdp& mdp, const StateSet& safe, const StateSet& prev_ergodic);

struct Expanders {
  StateSet set;
  std::vector<std::size_t> counts;
};

/// g_t(s) = |{s' ∉ S_t : u_t(s) - L d(s, s') >= h}| for s in `ergodic`.
Expanders expanders(const Mdp& mdp, const StateSet& ergodic, const StateSet& safe,
                    const ConfidenceBands& bands, double lipschitz, double h);

/// argmax of `widths` over `candidates`, lowest id on ties.
std::optional<StateId> acquisition_target(const StateSet& candidates, std::span<const double> widths);

}  // namespace safemdp
