#include "safemdp/terrain.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "safemdp/errors.hpp"

namespace safemdp {

std::size_t TerrainGrid::valid_cells() const {
  return static_cast<std::size_t>(std::count(nodata.begin(), nodata.end(), 0));
}

std::vector<std::uint8_t> TerrainGrid::valid_mask() const {
  std::vector<std::uint8_t> mask(nodata.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = nodata[i] ? 0 : 1;
  return mask;
}

// ---------------------------------------------------------------------------
// ESRI ASCII

namespace {

struct Token {
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  std::optional<Token> next() {
    while (true) {
      const int c = in_.peek();
      if (c == EOF) return std::nullopt;
      if (!std::isspace(c)) break;
      advance();
    }
    Token tok{{}, line_, column_};
    while (true) {
      const int c = in_.peek();
      if (c == EOF || std::isspace(c)) break;
      tok.text.push_back(static_cast<char>(c));
      advance();
    }
    return tok;
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  void advance() {
    if (in_.get() == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
  }

  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double parse_number(const Token& tok) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("expected a number, got '" + tok.text + "'", tok.line, tok.column);
  }
  return value;
}

std::size_t parse_count(const Token& tok) {
  const double v = parse_number(tok);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
    throw ParseError("expected a positive integer, got '" + tok.text + "'", tok.line, tok.column);
  }
  return static_cast<std::size_t>(v);
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

TerrainGrid load_esri_ascii(std::istream& in) {
  Tokenizer tokens(in);
  TerrainGrid grid;
  std::optional<std::size_t> ncols, nrows;
  std::optional<double> cellsize, xll, yll;
  std::optional<Token> tok = tokens.next();

  while (tok && std::isalpha(static_cast<unsigned char>(tok->text.front()))) {
    const std::string key = lower(tok->text);
    const Token key_tok = *tok;
    auto value = tokens.next();
    if (!value) {
      throw ParseError("header key '" + key_tok.text + "' has no value", tokens.line(),
                       tokens.column());
    }
    if (key == "ncols") {
      ncols = parse_count(*value);
    } else if (key == "nrows") {
      nrows = parse_count(*value);
    } else if (key == "xllcorner") {
      xll = parse_number(*value);
    } else if (key == "yllcorner") {
      yll = parse_number(*value);
    } else if (key == "cellsize") {
      cellsize = parse_number(*value);
      if (!(*cellsize > 0.0)) throw ParseError("cellsize must be positive", value->line, value->column);
    } else if (key == "nodata_value") {
      grid.nodata_value = parse_number(*value);
    } else {
      throw ParseError("unknown header key '" + key_tok.text + "'", key_tok.line, key_tok.column);
    }
    tok = tokens.next();
  }
  const std::size_t line = tok ? tok->line : tokens.line();
  const std::size_t column = tok ? tok->column : tokens.column();
  if (!ncols) throw ParseError("missing header key ncols", line, column);
  if (!nrows) throw ParseError("missing header key nrows", line, column);
  if (!xll) throw ParseError("missing header key xllcorner", line, column);
  if (!yll) throw ParseError("missing header key yllcorner", line, column);
  if (!cellsize) throw ParseError("missing header key cellsize", line, column);

  grid.cols = *ncols;
  grid.rows = *nrows;
  grid.cell_size = *cellsize;
  grid.xllcorner = *xll;
  grid.yllcorner = *yll;
  const std::size_t expected = grid.rows * grid.cols;
  grid.heights.reserve(expected);
  grid.nodata.reserve(expected);
  while (tok) {
    if (grid.heights.size() == expected) {
      throw DimensionMismatchError("more values than nrows * ncols = " + std::to_string(expected),
                                   tok->line, tok->column);
    }
    const double v = parse_number(*tok);
    grid.heights.push_back(v);
    grid.nodata.push_back(v == grid.nodata_value ? 1 : 0);
    tok = tokens.next();
  }
  if (grid.heights.size() != expected) {
    throw DimensionMismatchError("expected " + std::to_string(expected) + " values, found " +
                                     std::to_string(grid.heights.size()),
                                 tokens.line(), tokens.column());
  }
  return grid;
}

TerrainGrid load_esri_ascii(const std::string& text) {
  std::istringstream in(text);
  return load_esri_ascii(in);
}

TerrainGrid load_esri_ascii_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open terrain file " + path);
  return load_esri_ascii(in);
}

void write_esri_ascii(std::ostream& out, const TerrainGrid& grid) {
  if (grid.heights.size() != grid.num_cells() || grid.nodata.size() != grid.num_cells()) {
    throw DomainError("terrain grid arrays do not match its dimensions");
  }
  out << "ncols " << grid.cols << '\n'
      << "nrows " << grid.rows << '\n'
      << "xllcorner " << format_number(grid.xllcorner) << '\n'
      << "yllcorner " << format_number(grid.yllcorner) << '\n'
      << "cellsize " << format_number(grid.cell_size) << '\n'
      << "NODATA_value " << format_number(grid.nodata_value) << '\n';
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const std::size_t i = r * grid.cols + c;
      if (c > 0) out << ' ';
      out << format_number(grid.nodata[i] ? grid.nodata_value : grid.heights[i]);
    }
    out << '\n';
  }
}

void write_esri_ascii_file(const std::string& path, const TerrainGrid& grid) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write terrain file " + path);
  write_esri_ascii(out, grid);
  if (!out) throw Error("failed writing terrain file " + path);
}

// ---------------------------------------------------------------------------
// Synthetic terrain

namespace {

TerrainGrid blank_grid(std::size_t rows, std::size_t cols, double cell_size) {
  TerrainGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.cell_size = cell_size;
  grid.heights.assign(rows * cols, 0.0);
  grid.nodata.assign(rows * cols, 0);
  return grid;
}

void fill(TerrainGrid& grid, const GpSampleTerrain& spec) {
  const std::size_t n = grid.num_cells();
  if (n > kMaxGpSampleCells) {
    throw SizeLimitError("GP terrain samples are limited to " + std::to_string(kMaxGpSampleCells) +
                         " cells, requested " + std::to_string(n));
  }
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double dr = static_cast<double>(i / grid.cols) - static_cast<double>(j / grid.cols);
      const double dc = static_cast<double>(i % grid.cols) - static_cast<double>(j % grid.cols);
      cov(i, j) = cov(j, i) = spec.kernel(std::hypot(dr, dc) * grid.cell_size);
    }
  }
  // Smooth kernels are numerically rank deficient on dense grids.
  cov.diagonal().array() += 1e-8 * spec.kernel.variance();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw SingularSystemError("terrain prior is not positive definite");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = normal(rng);
  const Eigen::VectorXd h = llt.matrixL() * z;
  for (std::size_t i = 0; i < n; ++i) grid.heights[i] = h[i];
}

void fill(TerrainGrid& grid, const CraterHillTerrain& spec) {
  if (!(spec.hill_radius > 0.0) || !(spec.crater_radius > 0.0)) {
    throw DomainError("hill and crater radii must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double y = static_cast<double>(r), x = static_cast<double>(c);
      const double hill2 = (std::pow(y - spec.hill_row, 2) + std::pow(x - spec.hill_col, 2)) /
                           (spec.hill_radius * spec.hill_radius);
      const double crater2 = (std::pow(y - spec.crater_row, 2) + std::pow(x - spec.crater_col, 2)) /
                             (spec.crater_radius * spec.crater_radius);
      double z = spec.slope_x * x * grid.cell_size + spec.slope_y * y * grid.cell_size;
      z += spec.hill_height * std::exp(-0.5 * hill2);
      z -= spec.crater_depth * std::exp(-0.5 * crater2);
      if (spec.roughness > 0.0) z += spec.roughness * normal(rng);
      grid.heights[r * grid.cols + c] = z;
    }
  }
}

}  // namespace

TerrainGrid synth_terrain(const TerrainKind& kind, std::size_t rows, std::size_t cols,
                          double cell_size) {
  if (rows == 0 || cols == 0) throw DomainError("terrain dimensions must be positive");
  if (!(cell_size > 0.0)) throw DomainError("terrain cell_size must be positive");
  TerrainGrid grid = blank_grid(rows, cols, cell_size);
  std::visit([&grid](const auto& spec) { fill(grid, spec); }, kind);
  return grid;
}

// ---------------------------------------------------------------------------
// Terrain worlds

double TerrainSafetySpec::threshold(double cell_size) const {
  if (!(conservative_slope_deg > 0.0) || !(max_slope_deg > 0.0) || max_slope_deg >= 90.0) {
    throw DomainError("slopes must lie in (0, 90) degrees");
  }
  if (conservative_slope_deg > max_slope_deg) {
    throw DomainError("conservative slope exceeds the maximum slope");
  }
  return -cell_size * std::tan(conservative_slope_deg * std::numbers::pi / 180.0);
}

double TerrainSafetySpec::failure_threshold(double cell_size) const {
  threshold(cell_size);
  return -cell_size * std::tan(max_slope_deg * std::numbers::pi / 180.0);
}

StateSet TerrainWorld::lift(const std::vector<StateId>& base_states) const {
  StateSet base(augmented.base().num_states());
  for (StateId s : base_states) base.insert(s);
  StateSet out(num_states());
  base.for_each([&](StateId s) {
    out.insert(s);
    for (const auto& t : augmented.base().actions(s)) {
      if (base.contains(t.successor)) out.insert(augmented.action_state_of(s, t.action));
    }
  });
  return out;
}

Metric terrain_metric(const AugmentedMdp& augmented, const GridLayout& layout) {
  auto table = std::make_shared<std::vector<AugmentedState>>();
  table->reserve(augmented.num_states());
  for (StateId s = 0; s < augmented.num_states(); ++s) table->push_back(augmented.original_of(s));
  auto grid = std::make_shared<const GridLayout>(layout);
  return [table, grid](StateId x, StateId y) {
    if (x == y) return 0.0;
    const auto& ax = (*table)[x];
    const auto& ay = (*table)[y];
    if (!ax.action || !ay.action || *ax.action != *ay.action) {
      return std::numeric_limits<double>::infinity();
    }
    return grid->manhattan(ax.base, ay.base);
  };
}

BallQuery terrain_ball_query(const AugmentedMdp& augmented) {
  const Mdp& base = augmented.base();
  auto table = std::make_shared<std::vector<AugmentedState>>();
  table->reserve(augmented.num_states());
  for (StateId s = 0; s < augmented.num_states(); ++s) table->push_back(augmented.original_of(s));
  // Action-state of (base state, action label), or -1.
  auto lookup = std::make_shared<std::vector<std::int64_t>>(base.num_states() * kTerrainActions, -1);
  for (StateId s = 0; s < base.num_states(); ++s) {
    for (const auto& t : base.actions(s)) {
      if (t.action >= 0 && t.action < static_cast<ActionLabel>(kTerrainActions)) {
        (*lookup)[s * kTerrainActions + static_cast<std::size_t>(t.action)] =
            augmented.action_state_of(s, t.action);
      }
    }
  }
  BallQuery cells = base.ball_query();
  return [table, lookup, cells](StateId center, double radius, std::vector<StateId>& out) {
    const auto& a = (*table)[center];
    if (!a.action || !cells) {
      out.push_back(center);
      return;
    }
    const std::size_t first = out.size();
    cells(a.base, radius, out);
    std::size_t kept = first;
    for (std::size_t i = first; i < out.size(); ++i) {
      const std::int64_t id = (*lookup)[out[i] * kTerrainActions + static_cast<std::size_t>(*a.action)];
      if (id >= 0) out[kept++] = static_cast<StateId>(id);
    }
    out.resize(kept);
  };
}

TerrainWorld build_terrain_world(const TerrainGrid& grid, const TerrainSafetySpec& spec) {
  if (grid.heights.size() != grid.num_cells() || grid.nodata.size() != grid.num_cells()) {
    throw DomainError("terrain grid arrays do not match its dimensions");
  }
  if (grid.valid_cells() == 0) throw DomainError("terrain has no valid cells");
  const double h = spec.threshold(grid.cell_size);
  const double failure = spec.failure_threshold(grid.cell_size);
  GridWorld base = masked_grid(grid.rows, grid.cols, grid.cell_size, grid.valid_mask());
  AugmentedMdp plain = augment(base.mdp, 0.5 * grid.cell_size);
  AugmentedMdp aug = plain.with_metric(terrain_metric(plain, base.layout),
                                       terrain_ball_query(plain));

  std::vector<double> heights(base.mdp.num_states());
  for (StateId s = 0; s < heights.size(); ++s) heights[s] = grid.heights[base.layout.cell_of_state[s]];

  const std::size_t n = aug.num_states();
  std::vector<double> r(n);
  std::vector<std::pair<std::size_t, std::size_t>> endpoints(n);
  std::vector<std::optional<double>> pinned(n);
  for (StateId x = 0; x < n; ++x) {
    const AugmentedState a = aug.original_of(x);
    if (!a.action) {
      r[x] = kOriginalStateSafety;
      endpoints[x] = {a.base, a.base};
      pinned[x] = kOriginalStateSafety;
      continue;
    }
    const StateId to = base.mdp.step(a.base, *a.action);
    endpoints[x] = {a.base, to};
    r[x] = heights[a.base] - heights[to];
    if (to == a.base) pinned[x] = 0.0;
  }
  return TerrainWorld{std::move(base), std::move(aug), h, failure, std::move(r),
                      std::move(endpoints), std::move(pinned), std::move(heights)};
}

Environment make_environment(const TerrainWorld& world, double noise_std, std::uint64_t rng_seed) {
  Environment env(world.true_safety, world.h, noise_std, rng_seed);
  env.set_failure_threshold(world.failure_threshold);
  env.set_heights(world.heights);
  return env;
}

std::pair<AugmentedMdp, Environment> build_terrain_environment(const TerrainGrid& grid,
                                                               const TerrainSafetySpec& spec,
                                                               double noise_std,
                                                               std::uint64_t rng_seed) {
  TerrainWorld world = build_terrain_world(grid, spec);
  Environment env = make_environment(world, noise_std, rng_seed);
  return {std::move(world.augmented), std::move(env)};
}

CovarianceFn cell_covariance(const Kernel& kernel, const GridLayout& layout) {
  auto grid = std::make_shared<const GridLayout>(layout);
  return metric_covariance(kernel, [grid](PointId a, PointId b) {
    return grid->euclidean(static_cast<StateId>(a), static_cast<StateId>(b));
  });
}

GpSafetyModel difference_model(const TerrainWorld& world, const Kernel& kernel, double noise_std) {
  return GpSafetyModel(difference_covariance(cell_covariance(kernel, world.grid.layout), world.endpoints),
                       noise_std, world.pinned);
}

HeightSafetyModel height_model(const TerrainWorld& world, const Kernel& kernel, double noise_std) {
  return HeightSafetyModel(cell_covariance(kernel, world.grid.layout), noise_std,
                           world.grid.mdp.num_states(), world.endpoints, world.pinned);
}

Moments difference_moments(const GpModel& height_gp, const AugmentedMdp& aug) {
  const std::size_t cells = aug.base().num_states();
  std::vector<PointId> queries(cells);
  for (std::size_t c = 0; c < cells; ++c) queries[c] = c;
  const Posterior post = height_gp.posterior(queries);
  const std::size_t n = aug.num_states();
  Moments m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (StateId x = 0; x < n; ++x) {
    const AugmentedState a = aug.original_of(x);
    if (!a.action) continue;
    const StateId to = aug.base().step(a.base, *a.action);
    if (to == a.base) continue;
    m.mean[x] = post.mean[a.base] - post.mean[to];
    const double var = post.variance[a.base] + post.variance[to] -
                       2.0 * height_gp.posterior_cov(a.base, to);
    m.variance[x] = std::max(var, 0.0);
  }
  return m;
}

ConfidenceBands height_gp_to_difference_bands(const GpModel& height_gp, const AugmentedMdp& aug,
                                              double beta_t, const ConfidenceBands& prev,
                                              const StateSet& seed_set, double h) {
  Moments m = difference_moments(height_gp, aug);
  for (StateId x = 0; x < aug.num_states(); ++x) {
    if (!aug.is_action_state(x)) m.mean[x] = kOriginalStateSafety;
  }
  const ConfidenceBands start =
      prev.size() == 0 ? ConfidenceBands::prior(aug.num_states(), seed_set, h) : prev;
  return update_bands(start, m.mean, m.variance, beta_t);
}

}  // namespace safemdp
