#include "safemdp/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "safemdp/errors.hpp"
#include "safemdp/reach.hpp"

namespace safemdp {

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(std::vector<double> true_safety, double h, double noise_std,
                         std::uint64_t rng_seed)
    : true_safety_(std::move(true_safety)),
      h_(h),
      failure_threshold_(h),
      noise_std_(noise_std),
      rng_(rng_seed) {
  if (true_safety_.empty()) throw DomainError("environment needs at least one state");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw DomainError("noise_std must be non-negative");
  }
}

void Environment::set_failure_threshold(double threshold) {
  if (!(threshold <= h_)) throw DomainError("failure threshold must not exceed h");
  failure_threshold_ = threshold;
}

double Environment::noise() { return noise_std_ == 0.0 ? 0.0 : noise_std_ * normal_(rng_); }

double Environment::observe(StateId s) { return true_safety_.at(s) + noise(); }

void Environment::set_heights(std::vector<double> heights) { heights_ = std::move(heights); }

double Environment::observe_height(std::size_t cell) { return heights_.at(cell) + noise(); }

// ---------------------------------------------------------------------------
// Safety models

namespace {

std::vector<PointId> free_points(const std::vector<std::optional<double>>& pinned) {
  std::vector<PointId> out;
  for (std::size_t s = 0; s < pinned.size(); ++s) {
    if (!pinned[s]) out.push_back(s);
  }
  return out;
}

}  // namespace

GpSafetyModel::GpSafetyModel(CovarianceFn covariance, double noise_std,
                             std::vector<std::optional<double>> pinned)
    : gp_(std::move(covariance), noise_std), pinned_(std::move(pinned)), tracker_(free_points(pinned_)) {
  for (PointId p : tracker_.queries()) free_states_.push_back(static_cast<StateId>(p));
}

Moments GpSafetyModel::moments() {
  tracker_.sync(gp_);
  Moments m{std::vector<double>(pinned_.size(), 0.0), std::vector<double>(pinned_.size(), 0.0)};
  for (std::size_t s = 0; s < pinned_.size(); ++s) {
    if (pinned_[s]) m.mean[s] = *pinned_[s];
  }
  const auto& means = tracker_.means();
  for (std::size_t i = 0; i < free_states_.size(); ++i) {
    m.mean[free_states_[i]] = means[i];
    m.variance[free_states_[i]] = std::max(tracker_.raw_variance(i), 0.0);
  }
  return m;
}

double GpSafetyModel::measure(StateId s, Environment& env) {
  const double y = env.observe(s);
  if (!pinned_.at(s)) gp_ = gp_.with_observation(s, y);
  return y;
}

std::unique_ptr<SafetyModel> GpSafetyModel::clone() const {
  return std::make_unique<GpSafetyModel>(*this);
}

HeightSafetyModel::HeightSafetyModel(CovarianceFn cell_covariance, double noise_std,
                                     std::size_t num_cells,
                                     std::vector<std::pair<std::size_t, std::size_t>> endpoints,
                                     std::vector<std::optional<double>> pinned)
    : gp_(std::move(cell_covariance), noise_std),
      endpoints_(std::move(endpoints)),
      pinned_(std::move(pinned)),
      tracker_([num_cells] {
        std::vector<PointId> cells(num_cells);
        for (std::size_t c = 0; c < num_cells; ++c) cells[c] = c;
        return cells;
      }()) {
  if (endpoints_.size() != pinned_.size()) {
    throw DomainError("height model needs one endpoint pair per working state");
  }
  for (const auto& [a, b] : endpoints_) {
    if (a >= num_cells || b >= num_cells) throw DomainError("endpoint cell out of range");
  }
}

Moments HeightSafetyModel::moments() {
  tracker_.sync(gp_);
  const auto& means = tracker_.means();
  Moments m{std::vector<double>(pinned_.size(), 0.0), std::vector<double>(pinned_.size(), 0.0)};
  for (std::size_t s = 0; s < pinned_.size(); ++s) {
    if (pinned_[s]) {
      m.mean[s] = *pinned_[s];
      continue;
    }
    const auto [a, b] = endpoints_[s];
    m.mean[s] = means[a] - means[b];
    const double var =
        tracker_.raw_variance(a) + tracker_.raw_variance(b) - 2.0 * tracker_.covariance(a, b);
    m.variance[s] = std::max(var, 0.0);
  }
  return m;
}

double HeightSafetyModel::measure(StateId s, Environment& env) {
  if (pinned_.at(s)) return env.observe(s);
  if (!env.has_heights()) throw PreconditionError("environment has no heights to observe");
  const auto [a, b] = endpoints_[s];
  const double ya = env.observe_height(a);
  const double yb = env.observe_height(b);
  gp_ = gp_.with_observation(a, ya).with_observation(b, yb);
  return ya - yb;
}

std::unique_ptr<SafetyModel> HeightSafetyModel::clone() const {
  return std::make_unique<HeightSafetyModel>(*this);
}

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kSafeMdp: return "safemdp";
    case Strategy::kNoExpanders: return "no-expanders";
    case Strategy::kNonErgodic: return "non-ergodic";
    case Strategy::kUnsafe: return "unsafe";
    case Strategy::kRandom: return "random";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::kSafeMdp, Strategy::kNoExpanders, Strategy::kNonErgodic,
                     Strategy::kUnsafe, Strategy::kRandom}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::kConverged: return "converged";
    case TerminalReason::kExpandersEmpty: return "expanders-empty";
    case TerminalReason::kMaxIterations: return "max-iterations";
    case TerminalReason::kViolation: return "violation";
    case TerminalReason::kStuck: return "stuck";
  }
  return "unknown";
}

std::uint64_t bands_digest(const ConfidenceBands& bands) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](const std::vector<double>& values) {
    for (double v : values) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
      }
    }
  };
  feed(bands.lower);
  feed(bands.upper);
  return hash;
}

// ---------------------------------------------------------------------------
// Exploration loop

void validate_config(const Mdp& mdp, const ExplorerConfig& cfg) {
  const StateSet& seed = cfg.seed_set;
  if (seed.universe() != mdp.num_states()) {
    throw ConfigError("seed_set", "seed set does not match the number of states");
  }
  if (seed.empty()) throw ConfigError("seed_set", "seed set is empty");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (!(cfg.lipschitz_for_expanders > 0.0)) {
    throw ConfigError("lipschitz", "must be positive");
  }
  if (const auto* rule = std::get_if<LipschitzRule>(&cfg.mode); rule && !(rule->lipschitz > 0.0)) {
    throw ConfigError("lipschitz", "must be positive");
  }
  if (cfg.max_iterations == 0) throw ConfigError("max_iterations", "must be positive");
  if (cfg.start_state && !seed.contains(*cfg.start_state)) {
    throw ConfigError("start_state", "start state is not in the seed set");
  }
  bool failed = false;
  seed.for_each([&](StateId s) {
    if (failed) return;
    // Successors of s that stay inside the seed.
    StateSet targets(mdp.num_states());
    for (const auto& t : mdp.actions(s)) {
      if (seed.contains(t.successor)) targets.insert(t.successor);
    }
    StateSet back = r_ret_fixpoint(mdp, seed, StateSet(mdp.num_states(), {s}));
    if (back != seed || targets.empty()) {
      failed = true;
      return;
    }
    // Every seed state must also be reachable from s.
    StateSet forward = targets;
    StateSet frontier = targets;
    while (!frontier.empty()) {
      StateSet next = (r_reach(mdp, frontier) & seed) - forward;
      forward |= next;
      frontier = std::move(next);
    }
    if (!forward.contains(s) || forward != seed) failed = true;
  });
  if (failed) {
    throw ConfigError("seed_set", "seed states are not mutually reachable inside the seed");
  }
}

namespace {

SafeSets classify(Strategy strategy, const Mdp& mdp, const ConfidenceBands& bands,
                  const StateSet& prev, double h, const ExplorerConfig& cfg) {
  SafeSets sets;
  sets.safe = classify_safe(mdp, bands, prev, h, cfg.mode);
  if (strategy == Strategy::kNonErgodic) {
    sets.ergodic = sets.safe & r_reach(mdp, prev);
  } else {
    sets.ergodic = ergodic_safe(mdp, sets.safe, prev);
  }
  auto g = expanders(mdp, sets.ergodic, sets.safe, bands, cfg.lipschitz_for_expanders, h);
  sets.expanders = std::move(g.set);
  sets.expander_counts = std::move(g.counts);
  sets.widths = bands.widths();
  return sets;
}

const StateSet& candidates_of(Strategy strategy, const SafeSets& sets, const StateSet& everything) {
  switch (strategy) {
    case Strategy::kNoExpanders: return sets.ergodic;
    case Strategy::kUnsafe: return everything;
    default: return sets.expanders;
  }
}

StateId start_of(const ExplorerConfig& cfg) {
  if (cfg.start_state) return *cfg.start_state;
  return cfg.seed_set.members().front();
}

/// Walks `path`, counting steps and checking safety. Returns false on a failure.
bool walk(const PathPlan& path, Environment& env, ExplorationTrace& trace, StateId& position) {
  for (std::size_t i = 1; i < path.states.size(); ++i) {
    position = path.states[i];
    ++trace.agent_steps;
    if (!env.is_safe(position)) {
      ++trace.unsafe_visits;
      if (!trace.first_unsafe_step) trace.first_unsafe_step = trace.agent_steps;
    }
    if (env.is_failure(position)) {
      trace.terminal_reason = TerminalReason::kViolation;
      trace.violation_step = trace.agent_steps;
      return false;
    }
  }
  return true;
}

ExplorationTrace run_guided(Strategy strategy, const Mdp& mdp, Environment& env,
                            const ExplorerConfig& cfg, SafetyModel& model) {
  const std::size_t n = mdp.num_states();
  const double h = env.h();
  const StateSet everything = StateSet::full(n);
  ExplorationTrace trace;
  ConfidenceBands bands = ConfidenceBands::prior(n, cfg.seed_set, h);
  StateSet prev = cfg.seed_set;
  StateId position = start_of(cfg);
  bool bands_current = false;

  for (std::size_t t = 1;;) {
    if (!bands_current) {
      const Moments m = model.moments();
      bands = update_bands(bands, m.mean, m.variance, cfg.beta(t));
      bands_current = true;
    }
    SafeSets sets = classify(strategy, mdp, bands, prev, h, cfg);
    const StateSet& candidates = candidates_of(strategy, sets, everything);
    const auto target = acquisition_target(candidates, sets.widths);

    if (!target || sets.widths[*target] <= cfg.epsilon) {
      // Nothing left to learn under the current classification; let the
      // ergodic set catch up with it before declaring the end.
      if (sets.ergodic != prev) {
        prev = sets.ergodic;
        continue;
      }
      trace.terminal_reason = target ? TerminalReason::kConverged : TerminalReason::kExpandersEmpty;
      trace.final_sets = std::move(sets);
      break;
    }
    if (t > cfg.max_iterations) {
      trace.terminal_reason = TerminalReason::kMaxIterations;
      trace.final_sets = std::move(sets);
      break;
    }

    const StateSet& allowed = strategy == Strategy::kUnsafe ? everything : sets.safe;
    PathPlan path;
    try {
      if (*target == position) {
        auto cycle = shortest_safe_cycle(mdp, allowed, position);
        path = cycle ? std::move(*cycle) : PathPlan{{}, {position}};
      } else {
        path = shortest_safe_path(mdp, allowed, position, *target);
      }
    } catch (const NoPathError&) {
      trace.terminal_reason = TerminalReason::kStuck;
      trace.final_sets = std::move(sets);
      break;
    } catch (const PreconditionError&) {
      trace.terminal_reason = TerminalReason::kStuck;
      trace.final_sets = std::move(sets);
      break;
    }

    if (!walk(path, env, trace, position)) {
      trace.final_sets = std::move(sets);
      break;
    }
    if (cfg.measure_along_path) {
      for (std::size_t i = 1; i + 1 < path.states.size(); ++i) model.measure(path.states[i], env);
    }
    IterationRecord record;
    record.t = t;
    record.target = *target;
    record.width_at_target = sets.widths[*target];
    record.observation = model.measure(*target, env);
    record.path = std::move(path);
    record.bands_digest = bands_digest(bands);
    prev = sets.ergodic;
    record.sets = std::move(sets);
    trace.records.push_back(std::move(record));
    trace.iterations = t;
    bands_current = false;
    ++t;
  }
  trace.collapse_events = bands.collapse_events;
  trace.terminal_t = trace.iterations + 1;
  return trace;
}

ExplorationTrace run_random(const Mdp& mdp, Environment& env, const ExplorerConfig& cfg,
                            SafetyModel& model) {
  const std::size_t n = mdp.num_states();
  const double h = env.h();
  ExplorationTrace trace;
  ConfidenceBands bands = ConfidenceBands::prior(n, cfg.seed_set, h);
  StateSet prev = cfg.seed_set;
  StateId position = start_of(cfg);
  std::mt19937_64 policy(cfg.policy_seed);
  SafeSets sets;

  for (std::size_t t = 1;; ++t) {
    const Moments m = model.moments();
    bands = update_bands(bands, m.mean, m.variance, cfg.beta(t));
    sets = classify(Strategy::kRandom, mdp, bands, prev, h, cfg);
    prev = sets.ergodic;
    if (t > cfg.max_iterations) {
      trace.terminal_reason = TerminalReason::kMaxIterations;
      break;
    }
    const auto actions = mdp.actions(position);
    std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
    const Transition move = actions[pick(policy)];
    PathPlan path{{move.action}, {position, move.successor}};
    if (!walk(path, env, trace, position)) break;

    IterationRecord record;
    record.t = t;
    record.target = position;
    record.width_at_target = sets.widths[position];
    record.observation = model.measure(position, env);
    record.path = std::move(path);
    record.bands_digest = bands_digest(bands);
    record.sets = sets;
    trace.records.push_back(std::move(record));
    trace.iterations = t;
  }
  trace.final_sets = std::move(sets);
  trace.collapse_events = bands.collapse_events;
  trace.terminal_t = trace.iterations + 1;
  return trace;
}

void check_sizes(const Mdp& mdp, const Environment& env, const SafetyModel& model) {
  if (env.num_states() != mdp.num_states() || model.num_states() != mdp.num_states()) {
    throw DomainError("MDP, environment and safety model disagree on the number of states");
  }
}

}  // namespace

ExplorationTrace run_strategy(Strategy strategy, const Mdp& mdp, Environment& env,
                              const ExplorerConfig& cfg, SafetyModel& model) {
  validate_config(mdp, cfg);
  check_sizes(mdp, env, model);
  if (strategy == Strategy::kRandom) return run_random(mdp, env, cfg, model);
  return run_guided(strategy, mdp, env, cfg, model);
}

ExplorationTrace run_safemdp(const Mdp& mdp, Environment& env, const ExplorerConfig& cfg,
                             SafetyModel& model) {
  return run_strategy(Strategy::kSafeMdp, mdp, env, cfg, model);
}

ExplorationTrace run_baseline(Strategy kind, const Mdp& mdp, Environment& env,
                              const ExplorerConfig& cfg, SafetyModel& model) {
  if (kind == Strategy::kSafeMdp) throw DomainError("safemdp is not a baseline");
  return run_strategy(kind, mdp, env, cfg, model);
}

namespace {

GpSafetyModel metric_model(const Mdp& mdp, const Environment& env, const Kernel& kernel) {
  Metric metric = mdp.metric();
  auto distance = [metric](PointId a, PointId b) {
    return metric(static_cast<StateId>(a), static_cast<StateId>(b));
  };
  return GpSafetyModel(metric_covariance(kernel, distance), env.noise_std(),
                       std::vector<std::optional<double>>(mdp.num_states()));
}

}  // namespace

ExplorationTrace run_safemdp(const Mdp& mdp, Environment& env, const ExplorerConfig& cfg,
                             const Kernel& kernel) {
  auto model = metric_model(mdp, env, kernel);
  return run_safemdp(mdp, env, cfg, model);
}

ExplorationTrace run_baseline(Strategy kind, const Mdp& mdp, Environment& env,
                              const ExplorerConfig& cfg, const Kernel& kernel) {
  auto model = metric_model(mdp, env, kernel);
  return run_baseline(kind, mdp, env, cfg, model);
}

}  // namespace safemdp
