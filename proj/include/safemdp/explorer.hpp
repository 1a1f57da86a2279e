#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "safemdp/gp.hpp"
#include "safemdp/mdp.hpp"
#include "safemdp/planner.hpp"
#include "safemdp/safeset.hpp"
#include "safemdp/state_set.hpp"

namespace safemdp {

/// Simulated world: the true safety feature and a seeded noise stream.
///
/// `h` is the threshold the explorer must respect. Visiting a state below
/// the failure threshold ends a run; by default it equals `h`.
class Environment {
 public:
  Environment(std::vector<double> true_safety, double h, double noise_std, std::uint64_t rng_seed);

  std::size_t num_states() const noexcept { return true_safety_.size(); }
  double h() const noexcept { return h_; }
  double failure_threshold() const noexcept { return failure_threshold_; }
  /// Throws DomainError if `threshold` exceeds h.
  void set_failure_threshold(double threshold);
  double noise_std() const noexcept { return noise_std_; }
  const std::vector<double>& true_safety() const noexcept { return true_safety_; }
  /// r(s) >= h.
  bool is_safe(StateId s) const { return true_safety_.at(s) >= h_; }
  /// r(s) below the failure threshold.
  bool is_failure(StateId s) const { return true_safety_.at(s) < failure_threshold_; }

  /// r(s) plus Gaussian noise.
  double observe(StateId s);

  /// Optional per-cell heights for models that measure heights instead of differences.
  void set_heights(std::vector<double> heights);
  bool has_heights() const noexcept { return !heights_.empty(); }
  double observe_height(std::size_t cell);

 private:
  double noise();

  std::vector<double> true_safety_;
  double h_;
  double failure_threshold_;
  double noise_std_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<double> heights_;
};

/// Posterior moments of r over the working states.
struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Belief about the safety feature that the explorer queries and updates.
class SafetyModel {
 public:
  virtual ~SafetyModel() = default;
  virtual std::size_t num_states() const = 0;
  virtual Moments moments() = 0;
  /// Measures state `s` in `env`, updates the belief and returns the reading.
  virtual double measure(StateId s, Environment& env) = 0;
  virtual std::unique_ptr<SafetyModel> clone() const = 0;
};

/// GP directly over the working states. States with a known value are pinned:
/// they report that value with zero variance and are never fed to the GP.
class GpSafetyModel final : public SafetyModel {
 public:
  GpSafetyModel(CovarianceFn covariance, double noise_std, std::vector<std::optional<double>> pinned);

  std::size_t num_states() const override { return pinned_.size(); }
  Moments moments() override;
  double measure(StateId s, Environment& env) override;
  std::unique_ptr<SafetyModel> clone() const override;

  const GpModel& gp() const noexcept { return gp_; }

 private:
  GpModel gp_;
  std::vector<std::optional<double>> pinned_;
  std::vector<StateId> free_states_;
  PosteriorTracker tracker_;
};

/// GP over cell heights. A working state stands for the difference
/// H(from) - H(to) of two cells; measuring it observes both heights.
class HeightSafetyModel final : public SafetyModel {
 public:
  HeightSafetyModel(CovarianceFn cell_covariance, double noise_std, std::size_t num_cells,
                    std::vector<std::pair<std::size_t, std::size_t>> endpoints,
                    std::vector<std::optional<double>> pinned);

  std::size_t num_states() const override { return pinned_.size(); }
  Moments moments() override;
  double measure(StateId s, Environment& env) override;
  std::unique_ptr<SafetyModel> clone() const override;

  const GpModel& gp() const noexcept { return gp_; }

 private:
  GpModel gp_;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
  std::vector<std::optional<double>> pinned_;
  PosteriorTracker tracker_;
};

enum class Strategy { kSafeMdp, kNoExpanders, kNonErgodic, kUnsafe, kRandom };

std::string_view to_string(Strategy strategy);
/// Accepts safemdp, no-expanders, non-ergodic, unsafe, random.
std::optional<Strategy> parse_strategy(std::string_view name);

struct ExplorerConfig {
  BetaSchedule beta = BetaSchedule::constant(2.0);
  ClassifierMode mode = DirectRule{};
  double lipschitz_for_expanders = 1.0;
  double epsilon = 0.15;
  std::size_t max_iterations = 525;
  StateSet seed_set;
  /// Starting state of the agent; lowest seed state when empty.
  std::optional<StateId> start_state;
  bool measure_along_path = false;
  /// Drives the random baseline's action choice.
  std::uint64_t policy_seed = 0;
};

/// Throws ConfigError unless the seed is nonempty and every seed state can
/// reach every seed state, itself included, without leaving the seed.
void validate_config(const Mdp& mdp, const ExplorerConfig& cfg);

enum class TerminalReason { kConverged, kExpandersEmpty, kMaxIterations, kViolation, kStuck };

std::string_view to_string(TerminalReason reason);

struct IterationRecord {
  std::size_t t = 0;
  StateId target = 0;
  double width_at_target = 0.0;
  PathPlan path;
  double observation = 0.0;
  SafeSets sets;
  std::uint64_t bands_digest = 0;
};

struct ExplorationTrace {
  std::vector<IterationRecord> records;
  TerminalReason terminal_reason = TerminalReason::kMaxIterations;
  /// Step index k of the visit below the failure threshold that ended the run.
  std::optional<std::size_t> violation_step;
  /// Step index k of the first visit to a state with r < h.
  std::optional<std::size_t> first_unsafe_step;
  /// Visits to states with r < h.
  std::size_t unsafe_visits = 0;
  /// Number of measurements taken.
  std::size_t iterations = 0;
  /// Iteration index t at which the run ended.
  std::size_t terminal_t = 0;
  /// Movement steps k.
  std::size_t agent_steps = 0;
  SafeSets final_sets;
  std::size_t collapse_events = 0;
};

/// FNV-1a over the bytes of both bounds.
std::uint64_t bands_digest(const ConfidenceBands& bands);

ExplorationTrace run_safemdp(const Mdp& mdp, Environment& env, const ExplorerConfig& cfg,
                             SafetyModel& model);
ExplorationTrace run_baseline(Strategy kind, const Mdp& mdp, Environment& env,
                              const ExplorerConfig& cfg, SafetyModel& model);
/// Dispatches on `strategy`.
ExplorationTrace run_strategy(Strategy strategy, const Mdp& mdp, Environment& env,
                              const ExplorerConfig& cfg, SafetyModel& model);

/// Convenience overloads using a GP over the MDP's own metric. The kernel must
/// stay positive definite under that metric; Matern and squared exponential
/// kernels over Manhattan distances in two or more dimensions do not.
ExplorationTrace run_safemdp(const Mdp& mdp, Environment& env, const ExplorerConfig& cfg,
                             const Kernel& kernel);
ExplorationTrace run_baseline(Strategy kind, const Mdp& mdp, Environment& env,
                              const ExplorerConfig& cfg, const Kernel& kernel);

}  // namespace safemdp
