#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "safemdp/explorer.hpp"
#include "safemdp/gp.hpp"
#include "safemdp/mdp.hpp"

namespace safemdp {

/// Row-major height map, north row first.
struct TerrainGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 1.0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double nodata_value = -9999.0;
  std::vector<double> heights;
  /// 1 where the cell holds no data.
  std::vector<std::uint8_t> nodata;

  std::size_t num_cells() const noexcept { return rows * cols; }
  std::size_t valid_cells() const;
  /// 1 where the cell holds data.
  std::vector<std::uint8_t> valid_mask() const;

  friend bool operator==(const TerrainGrid&, const TerrainGrid&) = default;
};

/// ESRI ASCII grid. Throws ParseError (with line and column) on malformed
/// input and DimensionMismatchError when the value count disagrees with the header.
TerrainGrid load_esri_ascii(std::istream& in);
TerrainGrid load_esri_ascii(const std::string& text);
TerrainGrid load_esri_ascii_file(const std::string& path);
void write_esri_ascii(std::ostream& out, const TerrainGrid& grid);
void write_esri_ascii_file(const std::string& path, const TerrainGrid& grid);

struct GpSampleTerrain {
  Kernel kernel = Kernel::matern52(14.5, 10.0);
  std::uint64_t seed = 0;
};

/// Plane plus a Gaussian hill and a Gaussian crater. Centers are in cell
/// coordinates, radii are the Gaussian standard deviations in cells.
struct CraterHillTerrain {
  double slope_x = 0.0;  ///< height gain per meter eastwards
  double slope_y = 0.0;  ///< height gain per meter southwards
  double hill_row = 0.0;
  double hill_col = 0.0;
  double hill_height = 0.0;
  double hill_radius = 1.0;
  double crater_row = 0.0;
  double crater_col = 0.0;
  double crater_depth = 0.0;
  double crater_radius = 1.0;
  /// Standard deviation of independent per-cell height noise.
  double roughness = 0.0;
  std::uint64_t seed = 0;
};

using TerrainKind = std::variant<GpSampleTerrain, CraterHillTerrain>;

/// Largest grid a GP sample is drawn for.
inline constexpr std::size_t kMaxGpSampleCells = 1600;

/// Throws DomainError on non-positive dimensions and SizeLimitError when a GP
/// sample exceeds kMaxGpSampleCells.
TerrainGrid synth_terrain(const TerrainKind& kind, std::size_t rows, std::size_t cols,
                          double cell_size);

struct TerrainSafetySpec {
  double max_slope_deg = 30.0;
  double conservative_slope_deg = 25.0;

  /// -cell_size * tan(conservative slope). Throws DomainError on invalid slopes.
  double threshold(double cell_size) const;
  /// -cell_size * tan(max slope): climbing anything steeper fails.
  double failure_threshold(double cell_size) const;
};

/// Value of r on original states: far above any threshold.
inline constexpr double kOriginalStateSafety = 1e6;

/// Augmented grid MDP over a terrain with r on the transitions.
struct TerrainWorld {
  GridWorld grid;
  AugmentedMdp augmented;
  double h = 0.0;
  double failure_threshold = 0.0;
  /// True r per augmented state.
  std::vector<double> true_safety;
  /// Base states (from, to) of each augmented state; originals map to (s, s).
  std::vector<std::pair<std::size_t, std::size_t>> endpoints;
  /// Known values: originals and stay transitions.
  std::vector<std::optional<double>> pinned;
  /// Height of each base state.
  std::vector<double> heights;

  const Mdp& mdp() const noexcept { return augmented.mdp(); }
  std::size_t num_states() const noexcept { return augmented.num_states(); }
  /// The given base states plus the action-states of transitions between them.
  StateSet lift(const std::vector<StateId>& base_states) const;
};

/// Metric used on terrain worlds: action-states in the same direction are
/// their cells' Manhattan distance apart; everything else is infinitely far.
Metric terrain_metric(const AugmentedMdp& augmented, const GridLayout& layout);
/// Ball query matching terrain_metric; needs a base MDP with a ball query.
BallQuery terrain_ball_query(const AugmentedMdp& augmented);

/// Grid action labels run from kUp to kStay.
inline constexpr std::size_t kTerrainActions = 5;

/// Throws DomainError if the grid has no valid cells.
TerrainWorld build_terrain_world(const TerrainGrid& grid, const TerrainSafetySpec& spec);
std::pair<AugmentedMdp, Environment> build_terrain_environment(const TerrainGrid& grid,
                                                               const TerrainSafetySpec& spec,
                                                               double noise_std,
                                                               std::uint64_t rng_seed);
Environment make_environment(const TerrainWorld& world, double noise_std, std::uint64_t rng_seed);

/// Covariance of heights between base states, by Euclidean cell distance.
CovarianceFn cell_covariance(const Kernel& kernel, const GridLayout& layout);

/// GP over the transitions with the induced difference kernel.
GpSafetyModel difference_model(const TerrainWorld& world, const Kernel& kernel, double noise_std);
/// GP over heights; each measurement observes both endpoint heights.
HeightSafetyModel height_model(const TerrainWorld& world, const Kernel& kernel, double noise_std);

/// Difference moments mu(a) - mu(b) and var(a) + var(b) - 2 cov(a, b) of a
/// height GP over base states, per augmented state; originals get zero mean
/// and variance.
Moments difference_moments(const GpModel& height_gp, const AugmentedMdp& aug);

/// Intersects `prev` with the difference intervals implied by a height GP.
/// An empty `prev` starts from the prior over `seed_set`; originals are
/// always reported at kOriginalStateSafety.
ConfidenceBands height_gp_to_difference_bands(const GpModel& height_gp, const AugmentedMdp& aug,
                                              double beta_t, const ConfidenceBands& prev,
                                              const StateSet& seed_set, double h);

}  // namespace safemdp
