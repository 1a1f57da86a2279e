#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "safemdp/state_set.hpp"

namespace safemdp {

/// Index of a point in the finite domain of a GP.
using PointId = std::size_t;

/// Stationary covariance function of a distance.
struct Kernel {
  enum class Kind { kSquaredExponential, kMatern52 };

  Kind kind = Kind::kMatern52;
  double lengthscale = 1.0;
  double prior_std = 1.0;

  /// Throws DomainError unless lengthscale > 0 and prior_std > 0.
  static Kernel squared_exponential(double lengthscale, double prior_std);
  static Kernel matern52(double lengthscale, double prior_std);

  double operator()(double distance) const noexcept;
  double variance() const noexcept { return prior_std * prior_std; }
};

/// Prior covariance for a pair of points at the given distance.
double kernel_eval(const Kernel& kernel, double distance) noexcept;

/// Prior covariance between two points of the GP domain.
using CovarianceFn = std::function<double(PointId, PointId)>;

/// Covariance k(dist(a, b)) for an arbitrary distance function over point ids.
CovarianceFn metric_covariance(Kernel kernel, std::function<double(PointId, PointId)> distance);

/// Covariance of differences f(from[i]) - f(to[i]) of a GP f with covariance `base`.
CovarianceFn difference_covariance(CovarianceFn base,
                                   std::vector<std::pair<PointId, PointId>> endpoints);

struct Posterior {
  std::vector<double> mean;
  /// Clamped at zero.
  std::vector<double> variance;
  /// Smallest variance before clamping; roundoff only, never below -1e-8 in a healthy model.
  double min_raw_variance = 0.0;
};

/// Exact GP regression with zero prior mean over a finite index set.
///
/// Values are immutable snapshots: `with_observation` returns a new model that
/// shares the rows of the Cholesky factor of (K + noise^2 I) with its parent.
/// The factor grows by appending one row per observation and is refactorized
/// from scratch every `kRebuildInterval` observations, or whenever an append
/// fails, with diagonal jitter escalating from 1e-10 to 1e-6.
class GpModel {
 public:
  static constexpr std::size_t kRebuildInterval = 64;

  GpModel(CovarianceFn covariance, double noise_std);

  static GpModel from_batch(CovarianceFn covariance, double noise_std,
                            std::vector<PointId> inputs, std::vector<double> observations);

  GpModel with_observation(PointId point, double value) const;

  Posterior posterior(std::span<const PointId> queries) const;
  double posterior_cov(PointId a, PointId b) const;

  std::size_t size() const noexcept { return inputs_.size(); }
  const std::vector<PointId>& inputs() const noexcept { return inputs_; }
  const std::vector<double>& observations() const noexcept { return observations_; }
  double noise_std() const noexcept { return noise_std_; }
  double jitter() const noexcept { return jitter_; }
  const CovarianceFn& covariance() const noexcept { return covariance_; }

  /// Incremented whenever the factor is replaced by one that is not an
  /// extension of the previous factor (jitter changed).
  std::uint64_t factor_epoch() const noexcept { return epoch_; }
  /// Row i of the lower Cholesky factor, i+1 entries.
  std::span<const double> factor_row(std::size_t i) const { return *rows_[i]; }
  /// L^{-1} y.
  const std::vector<double>& whitened_observations() const noexcept { return whitened_; }

 private:
  using Row = std::shared_ptr<const std::vector<double>>;

  bool try_append_row(std::vector<Row>& rows, std::size_t index, double jitter) const;
  void refactorize();
  void rewhiten();
  /// v = L^{-1} k(inputs, q).
  std::vector<double> whiten_column(PointId query) const;

  CovarianceFn covariance_;
  double noise_std_;
  std::vector<PointId> inputs_;
  std::vector<double> observations_;
  std::vector<Row> rows_;
  std::vector<double> whitened_;
  double jitter_ = 0.0;
  std::uint64_t epoch_ = 0;
};

GpModel add_observation(const GpModel& model, PointId point, double value);

/// Maintains posterior moments for a fixed query set across a growing model.
///
/// For each query q it keeps v_q = L^{-1} k(D, q); one new observation adds
/// one entry per query, so a sync costs O(|queries| * n) instead of a full
/// O(|queries| * n^2) recomputation.
class PosteriorTracker {
 public:
  explicit PosteriorTracker(std::vector<PointId> queries);

  /// Brings the moments up to date with `model`, incrementally when the model
  /// extends the previously synced one.
  void sync(const GpModel& model);

  const std::vector<PointId>& queries() const noexcept { return queries_; }
  const std::vector<double>& means() const noexcept { return means_; }
  /// Clamped at zero.
  std::vector<double> variances() const;
  double raw_variance(std::size_t i) const noexcept { return raw_variances_[i]; }
  /// Posterior covariance between queries i and j.
  double covariance(std::size_t i, std::size_t j) const;

 private:
  void recompute(const GpModel& model);
  void extend(const GpModel& model, std::size_t row);

  std::vector<PointId> queries_;
  std::vector<std::vector<double>> whitened_;
  std::vector<double> means_;
  std::vector<double> raw_variances_;
  CovarianceFn covariance_;
  std::size_t synced_size_ = 0;
  std::uint64_t synced_epoch_ = 0;
  const double* last_row_ = nullptr;
  bool synced_ = false;
};

/// Schedule of the confidence scaling beta_t.
class BetaSchedule {
 public:
  struct Constant {
    double value;
  };
  struct Theoretical {
    double rkhs_bound;  ///< B
    double delta;       ///< failure probability, in (0, 1)
    std::function<double(std::size_t)> information_gain;  ///< gamma_t
  };

  static BetaSchedule constant(double value);
  static BetaSchedule theoretical(double rkhs_bound, double delta,
                                  std::function<double(std::size_t)> information_gain);

  /// Throws DomainError if t == 0 or, for the theoretical schedule, t / delta <= 1.
  double operator()(std::size_t t) const;

  const std::variant<Constant, Theoretical>& variant() const noexcept { return variant_; }

 private:
  explicit BetaSchedule(std::variant<Constant, Theoretical> v) : variant_(std::move(v)) {}
  std::variant<Constant, Theoretical> variant_;
};

double beta(const BetaSchedule& schedule, std::size_t t);

/// Running intersection C_t(s) of the per-iteration GP intervals.
struct ConfidenceBands {
  std::vector<double> lower;
  std::vector<double> upper;
  /// Number of empty intersections resolved so far.
  std::size_t collapse_events = 0;

  /// C_0: [h, inf) on the seed, the whole real line elsewhere.
  static ConfidenceBands prior(std::size_t num_states, const StateSet& seed, double h);

  std::size_t size() const noexcept { return lower.size(); }
  double width(std::size_t s) const noexcept { return upper[s] - lower[s]; }
  std::vector<double> widths() const;
};

/// C_t = C_{t-1} intersected with [mean -/+ sqrt(beta) * std].
///
/// An empty intersection collapses the band to the midpoint of the crossed
/// bounds, clamped into the previous band so bounds stay monotone.
ConfidenceBands update_bands(const ConfidenceBands& prev, std::span<const double> means,
                             std::span<const double> variances, double beta_t);

}  // namespace safemdp
