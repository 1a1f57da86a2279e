#include "safemdp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "safemdp/errors.hpp"

namespace safemdp {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;
// A pivot below this fraction of its diagonal entry is treated as singular.
constexpr double kPivotFloor = 1e-13;
constexpr double kJitterLevels[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

double dot(std::span<const double> a, std::span<const double> b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void check_kernel(double lengthscale, double prior_std) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw DomainError("kernel lengthscale must be positive, got " + std::to_string(lengthscale));
  }
  if (!(prior_std > 0.0) || !std::isfinite(prior_std)) {
    throw DomainError("kernel prior_std must be positive, got " + std::to_string(prior_std));
  }
}

}  // namespace

Kernel Kernel::squared_exponential(double lengthscale, double prior_std) {
  check_kernel(lengthscale, prior_std);
  return Kernel{Kind::kSquaredExponential, lengthscale, prior_std};
}

Kernel Kernel::matern52(double lengthscale, double prior_std) {
  check_kernel(lengthscale, prior_std);
  return Kernel{Kind::kMatern52, lengthscale, prior_std};
}

double Kernel::operator()(double distance) const noexcept {
  if (std::isinf(distance)) return 0.0;
  const double r = distance / lengthscale;
  switch (kind) {
    case Kind::kSquaredExponential:
      return variance() * std::exp(-0.5 * r * r);
    case Kind::kMatern52:
      return variance() * (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
  }
  return 0.0;
}

double kernel_eval(const Kernel& kernel, double distance) noexcept { return kernel(distance); }

CovarianceFn metric_covariance(Kernel kernel, std::function<double(PointId, PointId)> distance) {
  return [kernel, distance = std::move(distance)](PointId a, PointId b) {
    return kernel(distance(a, b));
  };
}

CovarianceFn difference_covariance(CovarianceFn base,
                                   std::vector<std::pair<PointId, PointId>> endpoints) {
  auto table = std::make_shared<const std::vector<std::pair<PointId, PointId>>>(std::move(endpoints));
  return [base = std::move(base), table](PointId a, PointId b) {
    const auto [s, s2] = (*table)[a];
    const auto [u, u2] = (*table)[b];
    return base(s, u) - base(s, u2) - base(s2, u) + base(s2, u2);
  };
}

// ---------------------------------------------------------------------------
// GpModel

GpModel::GpModel(CovarianceFn covariance, double noise_std)
    : covariance_(std::move(covariance)), noise_std_(noise_std) {
  if (!covariance_) throw DomainError("GP covariance function is empty");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw DomainError("GP noise_std must be non-negative, got " + std::to_string(noise_std));
  }
}

GpModel GpModel::from_batch(CovarianceFn covariance, double noise_std,
                            std::vector<PointId> inputs, std::vector<double> observations) {
  if (inputs.size() != observations.size()) {
    throw DomainError("GP batch has " + std::to_string(inputs.size()) + " inputs but " +
                      std::to_string(observations.size()) + " observations");
  }
  GpModel model(std::move(covariance), noise_std);
  model.inputs_ = std::move(inputs);
  model.observations_ = std::move(observations);
  if (!model.inputs_.empty()) {
    model.refactorize();
    model.rewhiten();
  }
  return model;
}

bool GpModel::try_append_row(std::vector<Row>& rows, std::size_t index, double jitter) const {
  const PointId x = inputs_[index];
  auto row = std::make_shared<std::vector<double>>(index + 1);
  auto& r = *row;
  for (std::size_t j = 0; j < index; ++j) {
    const auto& rj = *rows[j];
    const double a = covariance_(x, inputs_[j]);
    r[j] = (a - dot(r, rj, j)) / rj[j];
  }
  const double diag = covariance_(x, x) + noise_std_ * noise_std_ + jitter;
  const double pivot = diag - dot(r, r, index);
  if (!std::isfinite(pivot) || !(diag > 0.0) || pivot <= kPivotFloor * diag) return false;
  r[index] = std::sqrt(pivot);
  rows.push_back(std::move(row));
  return true;
}

void GpModel::refactorize() {
  const double previous_jitter = jitter_;
  for (double jitter : kJitterLevels) {
    std::vector<Row> rows;
    rows.reserve(inputs_.size());
    bool ok = true;
    for (std::size_t i = 0; i < inputs_.size() && ok; ++i) ok = try_append_row(rows, i, jitter);
    if (ok) {
      // Keep the shared storage of rows the rebuild reproduced exactly.
      for (std::size_t i = 0; i < std::min(rows.size(), rows_.size()); ++i) {
        if (*rows[i] == *rows_[i]) rows[i] = rows_[i];
      }
      rows_ = std::move(rows);
      jitter_ = jitter;
      if (jitter_ != previous_jitter) ++epoch_;
      return;
    }
  }
  throw SingularSystemError("(K + noise^2 I) is not positive definite after jitter " +
                            std::to_string(kJitterLevels[std::size(kJitterLevels) - 1]) +
                            " with " + std::to_string(inputs_.size()) + " observations");
}

void GpModel::rewhiten() {
  const std::size_t n = inputs_.size();
  whitened_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = *rows_[i];
    whitened_[i] = (observations_[i] - dot(row, whitened_, i)) / row[i];
  }
}

GpModel GpModel::with_observation(PointId point, double value) const {
  GpModel next = *this;
  next.inputs_.push_back(point);
  next.observations_.push_back(value);
  const std::size_t n = next.inputs_.size();
  if (n % kRebuildInterval == 0 || !next.try_append_row(next.rows_, n - 1, next.jitter_)) {
    next.refactorize();
    next.rewhiten();
    return next;
  }
  const auto& row = *next.rows_.back();
  next.whitened_.push_back((value - dot(row, next.whitened_, n - 1)) / row[n - 1]);
  return next;
}

std::vector<double> GpModel::whiten_column(PointId query) const {
  const std::size_t n = inputs_.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = *rows_[i];
    v[i] = (covariance_(inputs_[i], query) - dot(row, v, i)) / row[i];
  }
  return v;
}

Posterior GpModel::posterior(std::span<const PointId> queries) const {
  Posterior out;
  out.mean.resize(queries.size());
  out.variance.resize(queries.size());
  out.min_raw_variance = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto v = whiten_column(queries[q]);
    out.mean[q] = dot(v, whitened_, v.size());
    const double raw = covariance_(queries[q], queries[q]) - dot(v, v, v.size());
    out.min_raw_variance = std::min(out.min_raw_variance, raw);
    out.variance[q] = std::max(raw, 0.0);
  }
  if (queries.empty()) out.min_raw_variance = 0.0;
  return out;
}

double GpModel::posterior_cov(PointId a, PointId b) const {
  const auto va = whiten_column(a);
  if (a == b) return std::max(covariance_(a, a) - dot(va, va, va.size()), 0.0);
  const auto vb = whiten_column(b);
  return covariance_(a, b) - dot(va, vb, va.size());
}

GpModel add_observation(const GpModel& model, PointId point, double value) {
  return model.with_observation(point, value);
}

// ---------------------------------------------------------------------------
// PosteriorTracker

PosteriorTracker::PosteriorTracker(std::vector<PointId> queries)
    : queries_(std::move(queries)),
      whitened_(queries_.size()),
      means_(queries_.size(), 0.0),
      raw_variances_(queries_.size(), 0.0) {}

void PosteriorTracker::sync(const GpModel& model) {
  const std::size_t n = model.size();
  const bool extends = synced_ && model.factor_epoch() == synced_epoch_ && n >= synced_size_;
  bool same_lineage = extends;
  if (extends && synced_size_ > 0) {
    // Models of one lineage share factor rows, so the row storage is identical.
    same_lineage = model.factor_row(synced_size_ - 1).data() == last_row_;
  }
  if (!same_lineage) {
    recompute(model);
  } else {
    covariance_ = model.covariance();
    for (std::size_t row = synced_size_; row < n; ++row) extend(model, row);
  }
  synced_ = true;
  synced_size_ = n;
  synced_epoch_ = model.factor_epoch();
  last_row_ = n > 0 ? model.factor_row(n - 1).data() : nullptr;
}

void PosteriorTracker::recompute(const GpModel& model) {
  covariance_ = model.covariance();
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    whitened_[q].clear();
    means_[q] = 0.0;
    raw_variances_[q] = covariance_(queries_[q], queries_[q]);
  }
  for (std::size_t row = 0; row < model.size(); ++row) extend(model, row);
}

void PosteriorTracker::extend(const GpModel& model, std::size_t row) {
  const auto factor = model.factor_row(row);
  const PointId x = model.inputs()[row];
  const double z = model.whitened_observations()[row];
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    auto& v = whitened_[q];
    const double entry = (covariance_(x, queries_[q]) - dot(factor, v, row)) / factor[row];
    v.push_back(entry);
    means_[q] += entry * z;
    raw_variances_[q] -= entry * entry;
  }
}

std::vector<double> PosteriorTracker::variances() const {
  std::vector<double> out(raw_variances_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(raw_variances_[i], 0.0);
  return out;
}

double PosteriorTracker::covariance(std::size_t i, std::size_t j) const {
  const auto& vi = whitened_[i];
  const auto& vj = whitened_[j];
  return covariance_(queries_[i], queries_[j]) - dot(vi, vj, vi.size());
}

// ---------------------------------------------------------------------------
// BetaSchedule

BetaSchedule BetaSchedule::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError("constant beta must be positive, got " + std::to_string(value));
  }
  return BetaSchedule(Constant{value});
}

BetaSchedule BetaSchedule::theoretical(double rkhs_bound, double delta,
                                       std::function<double(std::size_t)> information_gain) {
  if (!(rkhs_bound > 0.0)) throw DomainError("RKHS bound B must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!information_gain) throw DomainError("information gain schedule is empty");
  return BetaSchedule(Theoretical{rkhs_bound, delta, std::move(information_gain)});
}

double BetaSchedule::operator()(std::size_t t) const {
  if (t == 0) throw DomainError("beta_t is defined for t >= 1");
  if (const auto* c = std::get_if<Constant>(&variant_)) return c->value;
  const auto& th = std::get<Theoretical>(variant_);
  const double ratio = static_cast<double>(t) / th.delta;
  if (!(ratio > 1.0)) {
    throw DomainError("theoretical beta needs t / delta > 1, got " + std::to_string(ratio));
  }
  const double log_term = std::log(ratio);
  return 2.0 * th.rkhs_bound + 300.0 * th.information_gain(t) * log_term * log_term * log_term;
}

double beta(const BetaSchedule& schedule, std::size_t t) { return schedule(t); }

// ---------------------------------------------------------------------------
// ConfidenceBands

ConfidenceBands ConfidenceBands::prior(std::size_t num_states, const StateSet& seed, double h) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  ConfidenceBands bands;
  bands.lower.assign(num_states, -inf);
  bands.upper.assign(num_states, inf);
  seed.for_each([&](StateId s) {
    if (s < num_states) bands.lower[s] = h;
  });
  return bands;
}

std::vector<double> ConfidenceBands::widths() const {
  std::vector<double> w(lower.size());
  for (std::size_t s = 0; s < w.size(); ++s) w[s] = upper[s] - lower[s];
  return w;
}

ConfidenceBands update_bands(const ConfidenceBands& prev, std::span<const double> means,
                             std::span<const double> variances, double beta_t) {
  if (means.size() != prev.size() || variances.size() != prev.size()) {
    throw DomainError("band update needs one mean and variance per state");
  }
  if (!(beta_t > 0.0)) throw DomainError("beta_t must be positive");
  const double scale = std::sqrt(beta_t);
  ConfidenceBands next = prev;
  for (std::size_t s = 0; s < prev.size(); ++s) {
    const double half = scale * std::sqrt(std::max(variances[s], 0.0));
    const double lo = std::max(prev.lower[s], means[s] - half);
    const double hi = std::min(prev.upper[s], means[s] + half);
    if (lo <= hi) {
      next.lower[s] = lo;
      next.upper[s] = hi;
      continue;
    }
    const double mid = std::clamp(0.5 * (lo + hi), prev.lower[s], prev.upper[s]);
    next.lower[s] = mid;
    next.upper[s] = mid;
    ++next.collapse_events;
  }
  return next;
}

}  // namespace safemdp
