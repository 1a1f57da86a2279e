#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "safemdp/explorer.hpp"
#include "safemdp/gp.hpp"
#include "safemdp/terrain.hpp"

namespace safemdp {

/// Environment variable that, when set, replaces the configured output directory.
inline constexpr const char* kOutputRootEnv = "SAFEMDP_OUTPUT_ROOT";

enum class EnvironmentSource { kSynth, kDem };
enum class SafetyModelKind { kDifference, kHeight };

/// Fully resolved experiment description, read from an INI file.
struct ExperimentConfig {
  EnvironmentSource source = EnvironmentSource::kSynth;
  std::string dem_path;
  TerrainKind terrain = CraterHillTerrain{};
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 1.0;

  TerrainSafetySpec safety;
  /// Explicit threshold; derived from the conservative slope when empty.
  std::optional<double> h;

  Kernel kernel = Kernel::matern52(14.5, 10.0);
  double noise_std = 0.075;
  SafetyModelKind model = SafetyModelKind::kDifference;

  double beta = 2.0;
  double epsilon = 0.15;
  double lipschitz = 1.0;
  std::size_t max_iterations = 525;
  bool lipschitz_safe_set = false;
  /// Seed cells as (row, col).
  std::vector<std::pair<std::size_t, std::size_t>> seed_cells;
  std::optional<std::pair<std::size_t, std::size_t>> start_cell;
  bool measure_along_path = false;

  Strategy strategy = Strategy::kSafeMdp;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";
};

/// Throws ConfigError naming the offending key (as section.key) on unknown
/// sections or keys, missing required keys and malformed values.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// INI text that parses back to the same configuration.
void write_experiment_config(std::ostream& out, const ExperimentConfig& cfg,
                             std::optional<std::uint64_t> seed = std::nullopt);

/// World, seed and reach oracles shared by every seed of an experiment.
struct PreparedExperiment {
  TerrainWorld world;
  StateSet seed_set;
  ExplorerConfig explorer;
  /// Reach oracle at the configured epsilon and at zero.
  StateSet oracle_eps;
  StateSet oracle_zero;
};

/// Throws ConfigError when the seed or start cell is invalid.
PreparedExperiment prepare_experiment(const ExperimentConfig& cfg);

struct Metrics {
  std::optional<double> coverage_fraction;
  /// First step k that visited a state with r < h.
  std::optional<std::size_t> violation_step;
  /// Step k that crossed the failure threshold and ended the run.
  std::optional<std::size_t> failure_step;
  std::size_t unsafe_visits = 0;
  std::size_t iterations = 0;
  std::size_t agent_steps = 0;
  TerminalReason terminal_reason = TerminalReason::kMaxIterations;
  std::size_t safe_size = 0;
  std::size_t ergodic_size = 0;
  std::size_t oracle_size = 0;
  std::size_t collapse_events = 0;
};

Metrics compute_metrics(const ExplorationTrace& trace, const StateSet& oracle);

/// Runs one seed: noise stream and policy are both seeded with `seed`.
ExplorationTrace run_experiment_seed(const ExperimentConfig& cfg, const PreparedExperiment& prep,
                                     std::uint64_t seed);

/// Columns: t,target,width,path_length,observation,safe_size,ergodic_size,expander_count
void write_trace_csv(std::ostream& out, const ExplorationTrace& trace);
/// Columns: t,safe,ergodic,expanders; sets as '0'/'1' strings, state 0 first.
void write_snapshots_csv(std::ostream& out, const ExplorationTrace& trace);
/// One `key: value` per line; absent optionals are written as an empty value.
void write_metrics(std::ostream& out, const Metrics& metrics, Strategy strategy, std::uint64_t seed);
/// Columns: state,kind,cell,action,r_eps,r_zero
void write_oracle_csv(std::ostream& out, const PreparedExperiment& prep);

std::filesystem::path output_directory(const ExperimentConfig& cfg);

/// Exit status: 0 on success (a recorded violation included), 2 on a
/// configuration error, 1 on any other error. Messages go to `err`.
int cmd_explore(const std::string& config_path, std::ostream& log, std::ostream& err);
int cmd_oracle(const std::string& config_path, std::ostream& log, std::ostream& err);

}  // namespace safemdp
