#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "safemdp/state_set.hpp"

namespace safemdp {

using ActionLabel = std::int32_t;

/// Fixed action labels of grid worlds.
namespace grid_action {
inline constexpr ActionLabel kUp = 0;
inline constexpr ActionLabel kDown = 1;
inline constexpr ActionLabel kLeft = 2;
inline constexpr ActionLabel kRight = 3;
inline constexpr ActionLabel kStay = 4;
}  // namespace grid_action

struct Transition {
  ActionLabel action;
  StateId successor;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Distance between two states, in abstract distance units. May be +infinity.
using Metric = std::function<double(StateId, StateId)>;

/// Appends to `out` a superset of the states within `radius` of `center`.
/// Lets set operators avoid all-pairs scans on structured metrics.
using BallQuery = std::function<void(StateId center, double radius, std::vector<StateId>& out)>;

/// Finite deterministic MDP over dense state ids 0..n-1.
///
/// A state without actions receives a `grid_action::kStay` self-loop so every
/// state can act. Actions are stored sorted by label.
class Mdp {
 public:
  Mdp(std::vector<std::vector<Transition>> actions, Metric metric);

  std::size_t num_states() const noexcept { return offsets_.size() - 1; }

  std::span<const Transition> actions(StateId s) const {
    return {transitions_.data() + offsets_[s], transitions_.data() + offsets_[s + 1]};
  }
  /// Distinct states with at least one action leading to `s`.
  std::span<const StateId> predecessors(StateId s) const {
    return {predecessors_.data() + pred_offsets_[s], predecessors_.data() + pred_offsets_[s + 1]};
  }

  /// f(s, a). Throws UnknownActionError when `a` is not available in `s`.
  StateId step(StateId s, ActionLabel a) const;
  std::optional<StateId> try_step(StateId s, ActionLabel a) const;

  double distance(StateId a, StateId b) const { return metric_(a, b); }
  const Metric& metric() const noexcept { return metric_; }
  const BallQuery& ball_query() const noexcept { return ball_; }

  /// Same dynamics under another metric, optionally with a ball query for it.
  Mdp with_metric(Metric metric, BallQuery ball = {}) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> pred_offsets_;
  std::vector<StateId> predecessors_;
  Metric metric_;
  BallQuery ball_;
};

StateId step(const Mdp& mdp, StateId s, ActionLabel a);

/// Placement of MDP states on a rectangular grid of cells. Row 0 is the north row.
struct GridLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 1.0;
  /// Row-major cell index of each state.
  std::vector<std::size_t> cell_of_state;
  /// State of each cell, or nullopt for cells outside the MDP.
  std::vector<std::optional<StateId>> state_of_cell;

  std::size_t row(StateId s) const { return cell_of_state[s] / cols; }
  std::size_t col(StateId s) const { return cell_of_state[s] % cols; }
  /// Manhattan distance between cell centers, in meters.
  double manhattan(StateId a, StateId b) const;
  /// Euclidean distance between cell centers, in meters.
  double euclidean(StateId a, StateId b) const;
};

struct GridWorld {
  Mdp mdp;
  GridLayout layout;
};

/// 4-connected grid with a stay action on every cell; metric is the Manhattan
/// distance times cell_size. State id = row * cols + col.
Mdp grid_mdp(std::size_t rows, std::size_t cols, double cell_size);

/// Grid over the cells with `valid[cell] != 0` only; states numbered in
/// row-major order of the valid cells.
GridWorld masked_grid(std::size_t rows, std::size_t cols, double cell_size,
                      std::span<const std::uint8_t> valid);

/// What an augmented state stands for in the base MDP.
struct AugmentedState {
  StateId base;
  /// Set for action-states s_a, empty for original states.
  std::optional<ActionLabel> action;

  bool is_action_state() const noexcept { return action.has_value(); }
  friend bool operator==(const AugmentedState&, const AugmentedState&) = default;
};

/// MDP with one action-state per (state, action) edge of a base MDP.
///
/// Original states keep their ids 0..n-1; action-states follow in order of
/// (state, action). From s, action a leads to s_a, whose single action (also
/// labelled a) leads to f(s, a). The metric places an action-state `offset`
/// away from its source state:
///   d(x, y) = d_base(base(x), base(y)) + offset*[x is s_a] + offset*[y is s_a], x != y.
class AugmentedMdp {
 public:
  AugmentedMdp(const Mdp& base, double offset);

  const Mdp& base() const noexcept { return base_; }
  const Mdp& mdp() const noexcept { return mdp_; }
  std::size_t num_states() const noexcept { return mdp_.num_states(); }
  double offset() const noexcept { return offset_; }

  /// Throws UnknownActionError if `a` is not an action of `s` in the base MDP.
  StateId action_state_of(StateId s, ActionLabel a) const;
  AugmentedState original_of(StateId augmented) const { return original_of_[augmented]; }
  bool is_action_state(StateId augmented) const { return original_of_[augmented].action.has_value(); }

  /// Same structure with the augmented metric replaced.
  AugmentedMdp with_metric(Metric metric, BallQuery ball = {}) const;

 private:
  Mdp base_;
  Mdp mdp_;
  double offset_;
  std::vector<std::size_t> first_action_state_;
  std::vector<AugmentedState> original_of_;
};

/// Augments with offset = half the smallest positive distance between a state
/// and one of its successors (cell_size / 2 on grids).
AugmentedMdp augment(const Mdp& mdp);
AugmentedMdp augment(const Mdp& mdp, double offset);

}  // namespace safemdp
