#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "safemdp/errors.hpp"
#include "safemdp/gp.hpp"

using namespace safemdp;

namespace {

struct Problem {
  std::vector<double> xs;
  CovarianceFn cov;
  Kernel kernel;
};

Problem line_problem(const Kernel& kernel, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Problem p{{}, {}, kernel};
  for (std::size_t i = 0; i < n; ++i) p.xs.push_back(u(rng));
  auto xs = p.xs;
  p.cov = metric_covariance(kernel, [xs](PointId a, PointId b) { return std::abs(xs[a] - xs[b]); });
  return p;
}

}  // namespace

TEST(Kernel, MaternAtOneLengthscale) {
  const Kernel k = Kernel::matern52(1.0, 10.0);
  EXPECT_NEAR(k(1.0), 52.39941088318203105927132507604956846014, 1e-12);
}

TEST(Kernel, ClosedFormsAndLimits) {
  for (double d : {0.0, 0.3, 1.7, 5.0}) {
    EXPECT_NEAR(Kernel::matern52(2.0, 3.0)(d), oracle::matern52(d, 2.0, 3.0), 1e-12);
    EXPECT_NEAR(Kernel::squared_exponential(2.0, 3.0)(d), oracle::squared_exponential(d, 2.0, 3.0),
                1e-12);
  }
  EXPECT_DOUBLE_EQ(Kernel::matern52(1.0, 2.0)(0.0), 4.0);
  EXPECT_EQ(Kernel::matern52(1.0, 2.0)(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_DOUBLE_EQ(kernel_eval(Kernel::squared_exponential(1.0, 1.0), 0.0), 1.0);
}

TEST(Kernel, RejectsNonPositiveHyperparameters) {
  EXPECT_THROW(Kernel::matern52(0.0, 1.0), DomainError);
  EXPECT_THROW(Kernel::squared_exponential(1.0, -1.0), DomainError);
}

TEST(GpModel, PriorWithoutData) {
  const auto p = line_problem(Kernel::matern52(2.0, 1.5), 5, 1);
  const GpModel gp(p.cov, 0.1);
  const std::vector<PointId> q{0, 1, 2};
  const auto post = gp.posterior(q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_EQ(post.mean[i], 0.0);
    EXPECT_DOUBLE_EQ(post.variance[i], 2.25);
  }
}

TEST(GpModel, MatchesDenseSolve) {
  for (const Kernel& kernel : {Kernel::matern52(1.5, 2.0), Kernel::squared_exponential(1.0, 0.7)}) {
    const auto p = line_problem(kernel, 40, 7);
    std::vector<PointId> inputs;
    std::vector<double> ys;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (PointId i = 0; i < 25; ++i) {
      inputs.push_back(i);
      ys.push_back(n01(rng));
    }
    const double noise = 0.2;
    const GpModel gp = GpModel::from_batch(p.cov, noise, inputs, ys);
    std::vector<PointId> q;
    for (PointId i = 20; i < 40; ++i) q.push_back(i);
    const auto post = gp.posterior(q);

    Eigen::MatrixXd kxx(25, 25);
    Eigen::MatrixXd kqx(q.size(), 25);
    Eigen::MatrixXd kqq(q.size(), q.size());
    for (int i = 0; i < 25; ++i) {
      for (int j = 0; j < 25; ++j) kxx(i, j) = p.cov(inputs[i], inputs[j]);
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      for (int j = 0; j < 25; ++j) kqx(i, j) = p.cov(q[i], inputs[j]);
      for (std::size_t j = 0; j < q.size(); ++j) kqq(i, j) = p.cov(q[i], q[j]);
    }
    const auto ref = oracle::dense_posterior(kxx, noise, Eigen::Map<Eigen::VectorXd>(ys.data(), 25),
                                             kqx, kqq);
    for (std::size_t i = 0; i < q.size(); ++i) {
      EXPECT_NEAR(post.mean[i], ref.mean(i), 1e-9);
      EXPECT_NEAR(post.variance[i], std::max(ref.cov(i, i), 0.0), 1e-9);
      EXPECT_NEAR(gp.posterior_cov(q[i], q[0]), ref.cov(i, 0), 1e-9);
    }
  }
}

TEST(GpModel, IncrementalEqualsBatchAcrossRebuilds) {
  const auto p = line_problem(Kernel::matern52(0.8, 1.0), 200, 11);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  GpModel inc(p.cov, 0.1);
  std::vector<PointId> inputs;
  std::vector<double> ys;
  for (PointId i = 0; i < 150; ++i) {
    const double y = n01(rng);
    inputs.push_back(i);
    ys.push_back(y);
    inc = inc.with_observation(i, y);
  }
  const GpModel batch = GpModel::from_batch(p.cov, 0.1, inputs, ys);
  std::vector<PointId> q;
  for (PointId i = 140; i < 200; ++i) q.push_back(i);
  const auto a = inc.posterior(q);
  const auto b = batch.posterior(q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_NEAR(a.mean[i], b.mean[i], 1e-8 * std::max(1.0, std::abs(b.mean[i])));
    EXPECT_NEAR(a.variance[i], b.variance[i], 1e-8);
  }
}

TEST(GpModel, ParentIsUnchangedByChildObservations) {
  const auto p = line_problem(Kernel::matern52(1.0, 1.0), 10, 2);
  const GpModel parent = GpModel(p.cov, 0.1).with_observation(0, 1.0);
  const GpModel child = parent.with_observation(1, -1.0);
  EXPECT_EQ(parent.size(), 1u);
  EXPECT_EQ(child.size(), 2u);
  const std::vector<PointId> q{0};
  EXPECT_NEAR(parent.posterior(q).mean[0], 1.0 / (1.0 + 0.01), 1e-12);
  EXPECT_EQ(add_observation(parent, 2, 0.5).size(), 2u);
}

TEST(GpModel, DuplicateNoiselessPointsUseJitter) {
  const auto p = line_problem(Kernel::squared_exponential(1.0, 1.0), 3, 4);
  GpModel gp(p.cov, 0.0);
  gp = gp.with_observation(0, 0.5).with_observation(0, 0.5);
  EXPECT_GT(gp.jitter(), 0.0);
  const std::vector<PointId> q{0};
  EXPECT_NEAR(gp.posterior(q).mean[0], 0.5, 1e-4);
}

TEST(GpModel, RejectsNegativeNoise) {
  const auto p = line_problem(Kernel::matern52(1.0, 1.0), 2, 1);
  EXPECT_THROW(GpModel(p.cov, -0.1), DomainError);
}

TEST(PosteriorTracker, FollowsModelIncrementallyAndAfterReset) {
  const auto p = line_problem(Kernel::matern52(1.0, 1.0), 120, 8);
  std::vector<PointId> q;
  for (PointId i = 0; i < 120; i += 3) q.push_back(i);
  PosteriorTracker tracker(q);
  GpModel gp(p.cov, 0.05);
  tracker.sync(gp);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (PointId i = 0; i < 100; ++i) {
    gp = gp.with_observation((i * 7) % 120, n01(rng));
    tracker.sync(gp);
    if (i % 17 != 0) continue;
    const auto post = gp.posterior(q);
    const auto vars = tracker.variances();
    for (std::size_t k = 0; k < q.size(); ++k) {
      EXPECT_NEAR(tracker.means()[k], post.mean[k], 1e-8);
      EXPECT_NEAR(vars[k], post.variance[k], 1e-8);
    }
    EXPECT_NEAR(tracker.covariance(0, 1), gp.posterior_cov(q[0], q[1]), 1e-8);
  }
  // An unrelated model forces a full recomputation.
  const GpModel other = GpModel(p.cov, 0.05).with_observation(5, 2.0);
  tracker.sync(other);
  const auto post = other.posterior(q);
  for (std::size_t k = 0; k < q.size(); ++k) EXPECT_NEAR(tracker.means()[k], post.mean[k], 1e-10);
}

TEST(DifferenceCovariance, MatchesLinearCombination) {
  const auto p = line_problem(Kernel::matern52(2.0, 1.0), 4, 3);
  const auto d = difference_covariance(p.cov, {{0, 1}, {2, 3}, {1, 0}});
  const double expect = p.cov(0, 2) - p.cov(0, 3) - p.cov(1, 2) + p.cov(1, 3);
  EXPECT_NEAR(d(0, 1), expect, 1e-15);
  EXPECT_NEAR(d(0, 2), -d(0, 0), 1e-15);
}

TEST(BetaSchedule, ConstantAndTheoretical) {
  EXPECT_EQ(BetaSchedule::constant(2.0)(7), 2.0);
  const auto th = BetaSchedule::theoretical(1.5, 0.1, [](std::size_t t) { return 0.5 * double(t); });
  const double l = std::log(4.0 / 0.1);
  EXPECT_NEAR(th(4), 3.0 + 300.0 * 2.0 * l * l * l, 1e-9);
  EXPECT_EQ(beta(BetaSchedule::constant(3.0), 1), 3.0);
  EXPECT_THROW(th(0), DomainError);
  EXPECT_THROW(BetaSchedule::constant(0.0), DomainError);
  EXPECT_THROW(BetaSchedule::theoretical(1.0, 1.5, [](std::size_t) { return 1.0; }), DomainError);
  const auto tiny = BetaSchedule::theoretical(1.0, 0.9, [](std::size_t) { return 1.0; });
  EXPECT_THROW(tiny(0), DomainError);
}

TEST(ConfidenceBands, PriorSeedsAtThreshold) {
  const auto b = ConfidenceBands::prior(3, StateSet(3, {1}), -0.5);
  EXPECT_EQ(b.lower[1], -0.5);
  EXPECT_TRUE(std::isinf(b.upper[1]));
  EXPECT_TRUE(std::isinf(b.lower[0]) && b.lower[0] < 0);
}

TEST(ConfidenceBands, IntersectionAndScaling) {
  auto b = ConfidenceBands::prior(2, StateSet(2), 0.0);
  const std::vector<double> m{1.0, 0.0};
  const std::vector<double> v{4.0, 1.0};
  b = update_bands(b, m, v, 2.0);
  EXPECT_NEAR(b.lower[0], 1.0 - std::sqrt(2.0) * 2.0, 1e-12);
  EXPECT_NEAR(b.upper[0], 1.0 + std::sqrt(2.0) * 2.0, 1e-12);
  const std::vector<double> m2{3.0, 0.0};
  b = update_bands(b, m2, v, 2.0);
  EXPECT_NEAR(b.lower[0], 3.0 - std::sqrt(2.0) * 2.0, 1e-12);
  EXPECT_NEAR(b.upper[0], 1.0 + std::sqrt(2.0) * 2.0, 1e-12);
  EXPECT_EQ(b.collapse_events, 0u);
}

TEST(ConfidenceBands, EmptyIntersectionCollapsesInsidePreviousBand) {
  ConfidenceBands b;
  b.lower = {0.0};
  b.upper = {1.0};
  const std::vector<double> m{5.0};
  const std::vector<double> v{0.01};
  const auto next = update_bands(b, m, v, 4.0);
  EXPECT_EQ(next.collapse_events, 1u);
  EXPECT_EQ(next.lower[0], next.upper[0]);
  EXPECT_GE(next.lower[0], 0.0);
  EXPECT_LE(next.upper[0], 1.0);
}

TEST(ConfidenceBands, SizeMismatchThrows) {
  const auto b = ConfidenceBands::prior(2, StateSet(2), 0.0);
  const std::vector<double> one{0.0};
  EXPECT_THROW(update_bands(b, one, one, 2.0), DomainError);
}
