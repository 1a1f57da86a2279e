#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "safemdp/experiment.hpp"
#include "safemdp/explorer.hpp"
#include "safemdp/gp.hpp"
#include "safemdp/mdp.hpp"

namespace fixtures {

using namespace safemdp;

inline std::string source_path(const std::string& relative) {
  return std::string(SAFEMDP_SOURCE_DIR) + "/" + relative;
}

/// The 30 x 30 crater and hill world shipped in configs/.
inline ExperimentConfig crater_hill_config() {
  return load_experiment_config(source_path("configs/crater_hill.ini"));
}

/// 6 x 6 crater world; the crater center shifts with `variant`.
inline ExperimentConfig small_crater_config(std::uint64_t variant) {
  ExperimentConfig cfg;
  cfg.rows = 6;
  cfg.cols = 6;
  CraterHillTerrain ch;
  ch.slope_x = 0.05;
  ch.crater_row = 4.5 + static_cast<double>(variant % 3) * 0.3;
  ch.crater_col = 1.0 + static_cast<double>(variant % 2) * 0.3;
  ch.crater_depth = 1.5;
  ch.crater_radius = 1.5;
  cfg.terrain = ch;
  cfg.kernel = Kernel::matern52(8.0, 5.0);
  cfg.lipschitz = 0.1;
  cfg.max_iterations = 200;
  cfg.seed_cells = {{1, 3}, {1, 4}, {2, 3}, {2, 4}};
  return cfg;
}

/// Plain 5 x 5 grid with a Lipschitz safety feature, for completeness checks.
struct LipschitzGrid {
  Mdp mdp;
  std::vector<double> r;
  double h;
  double lipschitz;
  StateSet seed;
  CovarianceFn covariance;
};

inline LipschitzGrid lipschitz_grid(std::uint64_t index) {
  constexpr std::size_t n = 5;
  const double lipschitz = 0.5;
  std::mt19937_64 rng(100 + index);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double gx = u(rng) * lipschitz;
  const double gy = u(rng) * lipschitz;
  const double bump = u(rng) * 0.2 * lipschitz;
  std::vector<double> r(n * n);
  for (std::size_t s = 0; s < n * n; ++s) {
    const double row = double(s / n);
    const double col = double(s % n);
    r[s] = gx * col + gy * row + bump * std::sin(row + col);
  }
  const auto best = static_cast<StateId>(std::max_element(r.begin(), r.end()) - r.begin());
  // Euclidean cell distances keep the Matern kernel positive definite.
  auto cov = metric_covariance(Kernel::matern52(4.0, 2.0), [](PointId a, PointId b) {
    const double dr = double(a / n) - double(b / n);
    const double dc = double(a % n) - double(b % n);
    return std::hypot(dr, dc);
  });
  return {grid_mdp(n, n, 1.0), r, r[best] - 1.2, lipschitz, StateSet(n * n, {best}), cov};
}

/// Line world: seed {0, 1}; a one-way door 1 -> 2 leads into states 2..4
/// with no way back; states 5..14 extend the safe region beyond state 0.
struct TrapdoorWorld {
  Mdp mdp;
  std::vector<double> r;
  double h;
  StateSet seed;
  CovarianceFn covariance;
};

inline TrapdoorWorld trapdoor_world() {
  using namespace grid_action;
  std::vector<double> x = {0, 1, 2, 3, 4};
  for (int i = 1; i <= 10; ++i) x.push_back(-i);
  const std::size_t n = x.size();
  std::vector<std::vector<Transition>> actions(n);
  auto both = [&](StateId left, StateId right) {
    actions[left].push_back({kRight, right});
    actions[right].push_back({kLeft, left});
  };
  both(0, 1);
  actions[1].push_back({kRight, 2});
  actions[2].push_back({kRight, 3});
  both(3, 4);
  both(5, 0);
  for (StateId i = 5; i + 1 < n; ++i) both(i + 1, i);
  for (StateId s = 0; s < n; ++s) actions[s].push_back({kStay, s});
  auto dist = [x](StateId a, StateId b) { return std::abs(x[a] - x[b]); };
  Mdp mdp(std::move(actions), dist);
  auto cov = metric_covariance(Kernel::matern52(2.0, 1.0),
                               [x](PointId a, PointId b) { return std::abs(x[a] - x[b]); });
  return {std::move(mdp), std::vector<double>(n, 0.0), -1.0, StateSet(n, {0, 1}), cov};
}

}  // namespace fixtures
