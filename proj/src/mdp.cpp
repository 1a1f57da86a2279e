#include "safemdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "safemdp/errors.hpp"

namespace safemdp {

Mdp::Mdp(std::vector<std::vector<Transition>> actions, Metric metric) : metric_(std::move(metric)) {
  if (actions.empty()) throw DomainError("an MDP needs at least one state");
  if (!metric_) throw DomainError("MDP metric is empty");
  const std::size_t n = actions.size();
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  for (std::size_t s = 0; s < n; ++s) {
    auto& list = actions[s];
    if (list.empty()) list.push_back({grid_action::kStay, static_cast<StateId>(s)});
    std::sort(list.begin(), list.end(),
              [](const Transition& a, const Transition& b) { return a.action < b.action; });
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].successor >= n) {
        throw DomainError("state " + std::to_string(s) + " has a successor outside the MDP");
      }
      if (i > 0 && list[i].action == list[i - 1].action) {
        throw DomainError("state " + std::to_string(s) + " lists action " +
                          std::to_string(list[i].action) + " twice");
      }
      transitions_.push_back(list[i]);
    }
    offsets_.push_back(transitions_.size());
  }

  std::vector<std::vector<StateId>> preds(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& t : this->actions(static_cast<StateId>(s))) {
      auto& p = preds[t.successor];
      if (p.empty() || p.back() != s) p.push_back(static_cast<StateId>(s));
    }
  }
  pred_offsets_.reserve(n + 1);
  pred_offsets_.push_back(0);
  for (const auto& p : preds) {
    predecessors_.insert(predecessors_.end(), p.begin(), p.end());
    pred_offsets_.push_back(predecessors_.size());
  }
}

std::optional<StateId> Mdp::try_step(StateId s, ActionLabel a) const {
  if (s >= num_states()) return std::nullopt;
  for (const auto& t : actions(s)) {
    if (t.action == a) return t.successor;
  }
  return std::nullopt;
}

StateId Mdp::step(StateId s, ActionLabel a) const {
  if (auto next = try_step(s, a)) return *next;
  throw UnknownActionError("action " + std::to_string(a) + " is not available in state " +
                           std::to_string(s));
}

Mdp Mdp::with_metric(Metric metric, BallQuery ball) const {
  if (!metric) throw DomainError("MDP metric is empty");
  Mdp copy = *this;
  copy.metric_ = std::move(metric);
  copy.ball_ = std::move(ball);
  return copy;
}

StateId step(const Mdp& mdp, StateId s, ActionLabel a) { return mdp.step(s, a); }

// ---------------------------------------------------------------------------
// Grids

double GridLayout::manhattan(StateId a, StateId b) const {
  const auto ra = static_cast<double>(row(a)), ca = static_cast<double>(col(a));
  const auto rb = static_cast<double>(row(b)), cb = static_cast<double>(col(b));
  return (std::abs(ra - rb) + std::abs(ca - cb)) * cell_size;
}

double GridLayout::euclidean(StateId a, StateId b) const {
  const auto ra = static_cast<double>(row(a)), ca = static_cast<double>(col(a));
  const auto rb = static_cast<double>(row(b)), cb = static_cast<double>(col(b));
  return std::hypot(ra - rb, ca - cb) * cell_size;
}

GridWorld masked_grid(std::size_t rows, std::size_t cols, double cell_size,
                      std::span<const std::uint8_t> valid) {
  if (rows == 0 || cols == 0) throw DomainError("grid dimensions must be positive");
  if (!(cell_size > 0.0)) throw DomainError("grid cell_size must be positive");
  if (valid.size() != rows * cols) throw DomainError("grid mask size does not match dimensions");

  auto layout = std::make_shared<GridLayout>();
  layout->rows = rows;
  layout->cols = cols;
  layout->cell_size = cell_size;
  layout->state_of_cell.assign(rows * cols, std::nullopt);
  for (std::size_t cell = 0; cell < rows * cols; ++cell) {
    if (valid[cell] != 0) {
      layout->state_of_cell[cell] = static_cast<StateId>(layout->cell_of_state.size());
      layout->cell_of_state.push_back(cell);
    }
  }
  if (layout->cell_of_state.empty()) throw DomainError("grid has no valid cells");

  std::vector<std::vector<Transition>> actions(layout->cell_of_state.size());
  for (StateId s = 0; s < actions.size(); ++s) {
    const std::size_t r = layout->row(s), c = layout->col(s);
    auto add = [&](ActionLabel a, std::size_t nr, std::size_t nc) {
      if (auto target = layout->state_of_cell[nr * cols + nc]) actions[s].push_back({a, *target});
    };
    if (r > 0) add(grid_action::kUp, r - 1, c);
    if (r + 1 < rows) add(grid_action::kDown, r + 1, c);
    if (c > 0) add(grid_action::kLeft, r, c - 1);
    if (c + 1 < cols) add(grid_action::kRight, r, c + 1);
    actions[s].push_back({grid_action::kStay, s});
  }
  Metric metric = [layout](StateId a, StateId b) { return layout->manhattan(a, b); };
  BallQuery ball = [layout](StateId center, double radius, std::vector<StateId>& out) {
    if (!(radius >= 0.0)) return;
    const double cells = std::floor(radius / layout->cell_size);
    const auto reach = static_cast<std::ptrdiff_t>(
        std::min(cells, static_cast<double>(layout->rows + layout->cols)));
    const auto r0 = static_cast<std::ptrdiff_t>(layout->row(center));
    const auto c0 = static_cast<std::ptrdiff_t>(layout->col(center));
    const auto rows = static_cast<std::ptrdiff_t>(layout->rows);
    const auto cols = static_cast<std::ptrdiff_t>(layout->cols);
    for (std::ptrdiff_t dr = -reach; dr <= reach; ++dr) {
      const std::ptrdiff_t r = r0 + dr;
      if (r < 0 || r >= rows) continue;
      const std::ptrdiff_t span = reach - std::abs(dr);
      for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, c0 - span);
           c <= std::min(cols - 1, c0 + span); ++c) {
        if (auto s = layout->state_of_cell[static_cast<std::size_t>(r * cols + c)]) out.push_back(*s);
      }
    }
  };
  Mdp mdp = Mdp(std::move(actions), std::move(metric));
  return GridWorld{mdp.with_metric(mdp.metric(), std::move(ball)), *layout};
}

Mdp grid_mdp(std::size_t rows, std::size_t cols, double cell_size) {
  if (rows == 0 || cols == 0) throw DomainError("grid dimensions must be positive");
  std::vector<std::uint8_t> valid(rows * cols, 1);
  return masked_grid(rows, cols, cell_size, valid).mdp;
}

// ---------------------------------------------------------------------------
// Augmentation

AugmentedMdp::AugmentedMdp(const Mdp& base, double offset)
    : base_(base), mdp_(base), offset_(offset) {
  if (!(offset >= 0.0) || !std::isfinite(offset)) {
    throw DomainError("action-state offset must be a finite non-negative distance");
  }
  const std::size_t n = base.num_states();
  original_of_.reserve(n);
  for (StateId s = 0; s < n; ++s) original_of_.push_back({s, std::nullopt});
  first_action_state_.resize(n);
  for (StateId s = 0; s < n; ++s) {
    first_action_state_[s] = original_of_.size();
    for (const auto& t : base.actions(s)) original_of_.push_back({s, t.action});
  }

  std::vector<std::vector<Transition>> actions(original_of_.size());
  for (StateId s = 0; s < n; ++s) {
    auto acts = base.actions(s);
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const auto sa = static_cast<StateId>(first_action_state_[s] + i);
      actions[s].push_back({acts[i].action, sa});
      actions[sa].push_back({acts[i].action, acts[i].successor});
    }
  }

  auto table = std::make_shared<const std::vector<AugmentedState>>(original_of_);
  Metric base_metric = base.metric();
  Metric metric = [table, base_metric, offset](StateId x, StateId y) {
    if (x == y) return 0.0;
    const auto& ax = (*table)[x];
    const auto& ay = (*table)[y];
    double d = base_metric(ax.base, ay.base);
    if (ax.action) d += offset;
    if (ay.action) d += offset;
    return d;
  };
  mdp_ = Mdp(std::move(actions), std::move(metric));
}

StateId AugmentedMdp::action_state_of(StateId s, ActionLabel a) const {
  if (s >= base_.num_states()) {
    throw UnknownActionError("state " + std::to_string(s) + " is not a base state");
  }
  auto acts = base_.actions(s);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (acts[i].action == a) return static_cast<StateId>(first_action_state_[s] + i);
  }
  throw UnknownActionError("action " + std::to_string(a) + " is not available in state " +
                           std::to_string(s));
}

AugmentedMdp AugmentedMdp::with_metric(Metric metric, BallQuery ball) const {
  AugmentedMdp copy = *this;
  copy.mdp_ = mdp_.with_metric(std::move(metric), std::move(ball));
  return copy;
}

AugmentedMdp augment(const Mdp& mdp, double offset) { return AugmentedMdp(mdp, offset); }

AugmentedMdp augment(const Mdp& mdp) {
  double smallest = std::numeric_limits<double>::infinity();
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    for (const auto& t : mdp.actions(s)) {
      if (t.successor == s) continue;
      const double d = mdp.distance(s, t.successor);
      if (d > 0.0 && d < smallest) smallest = d;
    }
  }
  return AugmentedMdp(mdp, std::isfinite(smallest) ? 0.5 * smallest : 0.5);
}

}  // namespace safemdp
