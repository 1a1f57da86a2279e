#include "safemdp/safeset.hpp"

#include <cmath>
#include <string>

#include "safemdp/errors.hpp"

namespace safemdp {

namespace {

void check_bands(const Mdp& mdp, const ConfidenceBands& bands) {
  if (bands.size() != mdp.num_states()) {
    throw DomainError("bands cover " + std::to_string(bands.size()) + " states, the MDP has " +
                      std::to_string(mdp.num_states()));
  }
}

}  // namespace

StateSet classify_safe(const Mdp& mdp, const ConfidenceBands& bands, const StateSet& prev_ergodic,
                       double h, const ClassifierMode& mode) {
  check_bands(mdp, bands);
  StateSet safe = prev_ergodic;
  const auto n = static_cast<StateId>(mdp.num_states());

  if (std::holds_alternative<DirectRule>(mode)) {
    for (StateId s = 0; s < n; ++s) {
      if (bands.lower[s] >= h) safe.insert(s);
    }
    return safe;
  }

  const double lipschitz = std::get<LipschitzRule>(mode).lipschitz;
  std::vector<StateId> witnesses;
  prev_ergodic.for_each([&](StateId w) {
    if (bands.lower[w] >= h) witnesses.push_back(w);
  });
  for (StateId s = 0; s < n; ++s) {
    if (safe.contains(s)) continue;
    for (StateId w : witnesses) {
      if (bands.lower[w] - lipschitz * mdp.distance(s, w) >= h) {
        safe.insert(s);
        break;
      }
    }
  }
  return safe;
}

StateSet ergodic_safe(const Mdp& mdp, const StateSet& safe, const StateSet& prev_ergodic) {
  if (!prev_ergodic.is_subset_of(safe)) {
    throw PreconditionError("previous ergodic set is not contained in the safe set");
  }
  return safe & r_reach(mdp, prev_ergodic) & r_ret_fixpoint(mdp, safe, prev_ergodic);
}

Expanders expanders(const Mdp& mdp, const StateSet& ergodic, const StateSet& safe,
                    const ConfidenceBands& bands, double lipschitz, double h) {
  check_bands(mdp, bands);
  if (!ergodic.is_subset_of(safe)) {
    throw PreconditionError("ergodic set is not contained in the safe set");
  }
  Expanders out{StateSet(mdp.num_states()), std::vector<std::size_t>(mdp.num_states(), 0)};
  const StateSet outside_set = safe.complement();
  if (outside_set.empty()) return out;
  const std::vector<StateId> outside = outside_set.members();
  const BallQuery& ball = mdp.ball_query();
  std::vector<StateId> near;
  ergodic.for_each([&](StateId s) {
    const double u = bands.upper[s];
    if (!(u >= h)) return;
    const double radius = (u - h) / lipschitz;
    const std::vector<StateId>* pool = &outside;
    if (ball && std::isfinite(radius)) {
      near.clear();
      ball(s, radius, near);
      pool = &near;
    }
    std::size_t count = 0;
    for (StateId x : *pool) {
      if (outside_set.contains(x) && u - lipschitz * mdp.distance(s, x) >= h) ++count;
    }
    out.counts[s] = count;
    if (count > 0) out.set.insert(s);
  });
  return out;
}

std::optional<StateId> acquisition_target(const StateSet& candidates, std::span<const double> widths) {
  std::optional<StateId> best;
  candidates.for_each([&](StateId s) {
    if (s >= widths.size()) throw DomainError("candidate state has no width");
    if (!best || widths[s] > widths[*best]) best = s;
  });
  return best;
}

}  // namespace safemdp
