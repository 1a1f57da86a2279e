#include "safemdp/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <system_error>

#include "safemdp/errors.hpp"
#include "safemdp/reach.hpp"

namespace safemdp {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"environment",
       {"source", "dem_path", "kind", "rows", "cols", "cell_size", "terrain_seed", "slope_x",
        "slope_y", "hill_row", "hill_col", "hill_height", "hill_radius", "crater_row",
        "crater_col", "crater_depth", "crater_radius", "roughness", "sample_kernel",
        "sample_lengthscale", "sample_prior_std"}},
      {"safety", {"h", "max_slope_deg", "conservative_slope_deg"}},
      {"gp", {"kernel", "lengthscale", "prior_std", "noise_std", "model"}},
      {"explorer",
       {"beta", "epsilon", "lipschitz", "max_iterations", "safe_set", "seed_cells", "start_cell",
        "measure_along_path"}},
      {"run", {"strategy", "seeds", "output_dir"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::pair<std::size_t, std::size_t> to_cell(const std::string& field, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError(field, "expected row:col, got '" + text + "'");
  return {to_unsigned(field, parts[0]), to_unsigned(field, parts[1])};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string format_optional(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

/// Reads `section.key` through `parse` when present.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <typename Fn>
  void read(const std::string& section, const std::string& key, Fn&& apply) const {
    if (auto v = raw(section, key)) apply(section + "." + key, *v);
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    read(section, key, [&](const std::string& f, const std::string& v) { out = to_double(f, v); });
  }
  void count(const std::string& section, const std::string& key, std::size_t& out) const {
    read(section, key, [&](const std::string& f, const std::string& v) {
      out = static_cast<std::size_t>(to_unsigned(f, v));
    });
  }

 private:
  const pt::ptree& tree_;
};

void check_schema(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError(section, "unknown section");
    if (!body.data().empty() && body.empty()) throw ConfigError(section, "key outside a section");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }
}

Kernel make_kernel(const std::string& field, const std::string& name, double lengthscale,
                   double prior_std) {
  if (!(lengthscale > 0.0)) throw ConfigError(field, "lengthscale must be positive");
  if (!(prior_std > 0.0)) throw ConfigError(field, "prior_std must be positive");
  if (name == "matern52") return Kernel::matern52(lengthscale, prior_std);
  if (name == "squared-exponential") return Kernel::squared_exponential(lengthscale, prior_std);
  throw ConfigError(field, "expected matern52 or squared-exponential, got '" + name + "'");
}

std::string kernel_name(const Kernel& kernel) {
  return kernel.kind == Kernel::Kind::kMatern52 ? "matern52" : "squared-exponential";
}

std::string model_name(SafetyModelKind kind) {
  return kind == SafetyModelKind::kDifference ? "difference" : "height";
}

std::vector<std::uint64_t> parse_seeds(const std::string& field, const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(to_unsigned(field, item));
      continue;
    }
    const auto lo = to_unsigned(field, item.substr(0, dots));
    const auto hi = to_unsigned(field, item.substr(dots + 2));
    if (hi < lo) throw ConfigError(field, "empty range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError(field, "no seeds given");
  return seeds;
}

StateId base_state(const ExperimentConfig& cfg, const TerrainWorld& world,
                   const std::pair<std::size_t, std::size_t>& cell, const std::string& field) {
  const auto& layout = world.grid.layout;
  if (cell.first >= layout.rows || cell.second >= layout.cols) {
    throw ConfigError(field, "cell " + std::to_string(cell.first) + ":" +
                                 std::to_string(cell.second) + " lies outside the " +
                                 std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols) + " grid");
  }
  const auto s = layout.state_of_cell[cell.first * layout.cols + cell.second];
  if (!s) {
    throw ConfigError(field, "cell " + std::to_string(cell.first) + ":" +
                                 std::to_string(cell.second) + " holds no data");
  }
  return *s;
}

TerrainGrid load_grid(const ExperimentConfig& cfg) {
  if (cfg.source == EnvironmentSource::kDem) return load_esri_ascii_file(cfg.dem_path);
  return synth_terrain(cfg.terrain, cfg.rows, cfg.cols, cfg.cell_size);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "malformed INI at line " + std::to_string(e.line()) + ": " +
                                    e.message());
  }
  check_schema(tree);
  const Reader r(tree);
  ExperimentConfig cfg;

  r.read("environment", "source", [&](const std::string& f, const std::string& v) {
    if (v == "synth") {
      cfg.source = EnvironmentSource::kSynth;
    } else if (v == "dem") {
      cfg.source = EnvironmentSource::kDem;
    } else {
      throw ConfigError(f, "expected synth or dem, got '" + v + "'");
    }
  });
  if (cfg.source == EnvironmentSource::kDem) {
    const auto path = r.raw("environment", "dem_path");
    if (!path || path->empty()) throw ConfigError("environment.dem_path", "required for source = dem");
    cfg.dem_path = *path;
  } else {
    std::string kind = "crater-hill";
    r.read("environment", "kind", [&](const std::string&, const std::string& v) { kind = v; });
    std::uint64_t terrain_seed = 0;
    r.read("environment", "terrain_seed",
           [&](const std::string& f, const std::string& v) { terrain_seed = to_unsigned(f, v); });
    if (kind == "crater-hill") {
      CraterHillTerrain ch;
      r.number("environment", "slope_x", ch.slope_x);
      r.number("environment", "slope_y", ch.slope_y);
      r.number("environment", "hill_row", ch.hill_row);
      r.number("environment", "hill_col", ch.hill_col);
      r.number("environment", "hill_height", ch.hill_height);
      r.number("environment", "hill_radius", ch.hill_radius);
      r.number("environment", "crater_row", ch.crater_row);
      r.number("environment", "crater_col", ch.crater_col);
      r.number("environment", "crater_depth", ch.crater_depth);
      r.number("environment", "crater_radius", ch.crater_radius);
      r.number("environment", "roughness", ch.roughness);
      if (!(ch.hill_radius > 0.0)) throw ConfigError("environment.hill_radius", "must be positive");
      if (!(ch.crater_radius > 0.0)) throw ConfigError("environment.crater_radius", "must be positive");
      if (ch.roughness < 0.0) throw ConfigError("environment.roughness", "must be non-negative");
      ch.seed = terrain_seed;
      cfg.terrain = ch;
    } else if (kind == "gp-sample") {
      std::string name = "matern52";
      double ls = 14.5;
      double sd = 10.0;
      r.read("environment", "sample_kernel", [&](const std::string&, const std::string& v) { name = v; });
      r.number("environment", "sample_lengthscale", ls);
      r.number("environment", "sample_prior_std", sd);
      cfg.terrain = GpSampleTerrain{make_kernel("environment.sample_kernel", name, ls, sd), terrain_seed};
    } else {
      throw ConfigError("environment.kind", "expected crater-hill or gp-sample, got '" + kind + "'");
    }
    for (const char* key : {"rows", "cols"}) {
      if (!r.raw("environment", key)) throw ConfigError(std::string("environment.") + key, "required");
    }
    r.count("environment", "rows", cfg.rows);
    r.count("environment", "cols", cfg.cols);
    r.number("environment", "cell_size", cfg.cell_size);
    if (cfg.rows == 0) throw ConfigError("environment.rows", "must be positive");
    if (cfg.cols == 0) throw ConfigError("environment.cols", "must be positive");
    if (!(cfg.cell_size > 0.0)) throw ConfigError("environment.cell_size", "must be positive");
  }

  const auto h = r.raw("safety", "h");
  if (!h) throw ConfigError("safety.h", "required (a number or auto)");
  if (*h != "auto") cfg.h = to_double("safety.h", *h);
  r.number("safety", "max_slope_deg", cfg.safety.max_slope_deg);
  r.number("safety", "conservative_slope_deg", cfg.safety.conservative_slope_deg);
  if (!(cfg.safety.max_slope_deg > 0.0 && cfg.safety.max_slope_deg < 90.0)) {
    throw ConfigError("safety.max_slope_deg", "must lie in (0, 90)");
  }
  if (!(cfg.safety.conservative_slope_deg > 0.0 &&
        cfg.safety.conservative_slope_deg <= cfg.safety.max_slope_deg)) {
    throw ConfigError("safety.conservative_slope_deg", "must lie in (0, max_slope_deg]");
  }

  {
    std::string name = "matern52";
    double ls = 14.5;
    double sd = 10.0;
    r.read("gp", "kernel", [&](const std::string&, const std::string& v) { name = v; });
    r.number("gp", "lengthscale", ls);
    r.number("gp", "prior_std", sd);
    cfg.kernel = make_kernel("gp.kernel", name, ls, sd);
    r.number("gp", "noise_std", cfg.noise_std);
    if (!(cfg.noise_std > 0.0)) throw ConfigError("gp.noise_std", "must be positive");
    r.read("gp", "model", [&](const std::string& f, const std::string& v) {
      if (v == "difference") {
        cfg.model = SafetyModelKind::kDifference;
      } else if (v == "height") {
        cfg.model = SafetyModelKind::kHeight;
      } else {
        throw ConfigError(f, "expected difference or height, got '" + v + "'");
      }
    });
  }

  r.number("explorer", "beta", cfg.beta);
  if (!(cfg.beta > 0.0)) throw ConfigError("explorer.beta", "must be positive");
  r.number("explorer", "epsilon", cfg.epsilon);
  r.number("explorer", "lipschitz", cfg.lipschitz);
  r.count("explorer", "max_iterations", cfg.max_iterations);
  r.read("explorer", "safe_set", [&](const std::string& f, const std::string& v) {
    if (v == "direct") {
      cfg.lipschitz_safe_set = false;
    } else if (v == "lipschitz") {
      cfg.lipschitz_safe_set = true;
    } else {
      throw ConfigError(f, "expected direct or lipschitz, got '" + v + "'");
    }
  });
  const auto cells = r.raw("explorer", "seed_cells");
  if (!cells || cells->empty()) throw ConfigError("explorer.seed_cells", "required");
  for (const auto& item : split(*cells, ',')) {
    cfg.seed_cells.push_back(to_cell("explorer.seed_cells", item));
  }
  r.read("explorer", "start_cell",
         [&](const std::string& f, const std::string& v) { cfg.start_cell = to_cell(f, v); });
  r.read("explorer", "measure_along_path",
         [&](const std::string& f, const std::string& v) { cfg.measure_along_path = to_bool(f, v); });

  r.read("run", "strategy", [&](const std::string& f, const std::string& v) {
    const auto s = parse_strategy(v);
    if (!s) throw ConfigError(f, "unknown strategy '" + v + "'");
    cfg.strategy = *s;
  });
  r.read("run", "seeds", [&](const std::string& f, const std::string& v) { cfg.seeds = parse_seeds(f, v); });
  r.read("run", "output_dir", [&](const std::string&, const std::string& v) { cfg.output_dir = v; });
  if (cfg.output_dir.empty()) throw ConfigError("run.output_dir", "must not be empty");
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  return parse_experiment_config(in);
}

void write_experiment_config(std::ostream& out, const ExperimentConfig& cfg,
                             std::optional<std::uint64_t> seed) {
  pt::ptree tree;
  auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
    tree.put(pt::ptree::path_type(section + "\x1f" + key, '\x1f'), value);
  };
  if (cfg.source == EnvironmentSource::kDem) {
    put("environment", "source", "dem");
    put("environment", "dem_path", cfg.dem_path);
  } else {
    put("environment", "source", "synth");
    if (const auto* ch = std::get_if<CraterHillTerrain>(&cfg.terrain)) {
      put("environment", "kind", "crater-hill");
      put("environment", "terrain_seed", std::to_string(ch->seed));
      put("environment", "slope_x", format_double(ch->slope_x));
      put("environment", "slope_y", format_double(ch->slope_y));
      put("environment", "hill_row", format_double(ch->hill_row));
      put("environment", "hill_col", format_double(ch->hill_col));
      put("environment", "hill_height", format_double(ch->hill_height));
      put("environment", "hill_radius", format_double(ch->hill_radius));
      put("environment", "crater_row", format_double(ch->crater_row));
      put("environment", "crater_col", format_double(ch->crater_col));
      put("environment", "crater_depth", format_double(ch->crater_depth));
      put("environment", "crater_radius", format_double(ch->crater_radius));
      put("environment", "roughness", format_double(ch->roughness));
    } else {
      const auto& gs = std::get<GpSampleTerrain>(cfg.terrain);
      put("environment", "kind", "gp-sample");
      put("environment", "terrain_seed", std::to_string(gs.seed));
      put("environment", "sample_kernel", kernel_name(gs.kernel));
      put("environment", "sample_lengthscale", format_double(gs.kernel.lengthscale));
      put("environment", "sample_prior_std", format_double(gs.kernel.prior_std));
    }
    put("environment", "rows", std::to_string(cfg.rows));
    put("environment", "cols", std::to_string(cfg.cols));
    put("environment", "cell_size", format_double(cfg.cell_size));
  }
  put("safety", "h", cfg.h ? format_double(*cfg.h) : "auto");
  put("safety", "max_slope_deg", format_double(cfg.safety.max_slope_deg));
  put("safety", "conservative_slope_deg", format_double(cfg.safety.conservative_slope_deg));
  put("gp", "kernel", kernel_name(cfg.kernel));
  put("gp", "lengthscale", format_double(cfg.kernel.lengthscale));
  put("gp", "prior_std", format_double(cfg.kernel.prior_std));
  put("gp", "noise_std", format_double(cfg.noise_std));
  put("gp", "model", model_name(cfg.model));
  put("explorer", "beta", format_double(cfg.beta));
  put("explorer", "epsilon", format_double(cfg.epsilon));
  put("explorer", "lipschitz", format_double(cfg.lipschitz));
  put("explorer", "max_iterations", std::to_string(cfg.max_iterations));
  put("explorer", "safe_set", cfg.lipschitz_safe_set ? "lipschitz" : "direct");
  std::string cells;
  for (const auto& [row, col] : cfg.seed_cells) {
    if (!cells.empty()) cells += ", ";
    cells += std::to_string(row) + ":" + std::to_string(col);
  }
  put("explorer", "seed_cells", cells);
  if (cfg.start_cell) {
    put("explorer", "start_cell",
        std::to_string(cfg.start_cell->first) + ":" + std::to_string(cfg.start_cell->second));
  }
  put("explorer", "measure_along_path", cfg.measure_along_path ? "true" : "false");
  put("run", "strategy", std::string(to_string(cfg.strategy)));
  std::string seeds;
  if (seed) {
    seeds = std::to_string(*seed);
  } else {
    for (auto s : cfg.seeds) seeds += (seeds.empty() ? "" : ", ") + std::to_string(s);
  }
  put("run", "seeds", seeds);
  put("run", "output_dir", cfg.output_dir);
  pt::write_ini(out, tree);
}

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
  const TerrainGrid grid = load_grid(cfg);
  TerrainWorld world = build_terrain_world(grid, cfg.safety);
  if (cfg.h) {
    world.h = *cfg.h;
    world.failure_threshold = std::min(world.failure_threshold, world.h);
  }
  ExperimentConfig resolved = cfg;
  resolved.rows = grid.rows;
  resolved.cols = grid.cols;

  std::vector<StateId> seed_states;
  for (const auto& cell : cfg.seed_cells) {
    seed_states.push_back(base_state(resolved, world, cell, "explorer.seed_cells"));
  }
  StateSet seed = world.lift(seed_states);

  ExplorerConfig ex;
  ex.beta = BetaSchedule::constant(cfg.beta);
  ex.mode = cfg.lipschitz_safe_set ? ClassifierMode{LipschitzRule{cfg.lipschitz}}
                                   : ClassifierMode{DirectRule{}};
  ex.lipschitz_for_expanders = cfg.lipschitz;
  ex.epsilon = cfg.epsilon;
  ex.max_iterations = cfg.max_iterations;
  ex.seed_set = seed;
  if (cfg.start_cell) ex.start_state = base_state(resolved, world, *cfg.start_cell, "explorer.start_cell");
  ex.measure_along_path = cfg.measure_along_path;
  validate_config(world.mdp(), ex);

  const SafetyRule rule = ex.mode;
  StateSet oracle_eps =
      r_eps_fixpoint(world.mdp(), seed, world.true_safety, cfg.epsilon, rule, world.h);
  StateSet oracle_zero = r_eps_fixpoint(world.mdp(), seed, world.true_safety, 0.0, rule, world.h);
  return PreparedExperiment{std::move(world), std::move(seed), std::move(ex), std::move(oracle_eps),
                            std::move(oracle_zero)};
}

Metrics compute_metrics(const ExplorationTrace& trace, const StateSet& oracle) {
  Metrics m;
  const StateSet& ergodic = trace.final_sets.ergodic;
  m.oracle_size = oracle.count();
  if (m.oracle_size > 0 && ergodic.universe() == oracle.universe()) {
    m.coverage_fraction =
        static_cast<double>((ergodic & oracle).count()) / static_cast<double>(m.oracle_size);
  }
  m.violation_step = trace.first_unsafe_step;
  m.failure_step = trace.violation_step;
  m.unsafe_visits = trace.unsafe_visits;
  m.iterations = trace.iterations;
  m.agent_steps = trace.agent_steps;
  m.terminal_reason = trace.terminal_reason;
  m.safe_size = trace.final_sets.safe.count();
  m.ergodic_size = ergodic.count();
  m.collapse_events = trace.collapse_events;
  return m;
}

ExplorationTrace run_experiment_seed(const ExperimentConfig& cfg, const PreparedExperiment& prep,
                                     std::uint64_t seed) {
  Environment env = make_environment(prep.world, cfg.noise_std, seed);
  ExplorerConfig ex = prep.explorer;
  ex.policy_seed = seed;
  if (cfg.model == SafetyModelKind::kHeight) {
    HeightSafetyModel model = height_model(prep.world, cfg.kernel, cfg.noise_std);
    return run_strategy(cfg.strategy, prep.world.mdp(), env, ex, model);
  }
  GpSafetyModel model = difference_model(prep.world, cfg.kernel, cfg.noise_std);
  return run_strategy(cfg.strategy, prep.world.mdp(), env, ex, model);
}

void write_trace_csv(std::ostream& out, const ExplorationTrace& trace) {
  out << "t,target,width,path_length,observation,safe_size,ergodic_size,expander_count\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << r.target << ',' << format_double(r.width_at_target) << ','
        << r.path.hops() << ',' << format_double(r.observation) << ',' << r.sets.safe.count() << ','
        << r.sets.ergodic.count() << ',' << r.sets.expanders.count() << '\n';
  }
}

void write_snapshots_csv(std::ostream& out, const ExplorationTrace& trace) {
  out << "t,safe,ergodic,expanders\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << r.sets.safe.to_bits() << ',' << r.sets.ergodic.to_bits() << ','
        << r.sets.expanders.to_bits() << '\n';
  }
}

void write_metrics(std::ostream& out, const Metrics& m, Strategy strategy, std::uint64_t seed) {
  out << "strategy: " << to_string(strategy) << '\n'
      << "seed: " << seed << '\n'
      << "terminal_reason: " << to_string(m.terminal_reason) << '\n'
      << "coverage_fraction: " << format_optional(m.coverage_fraction) << '\n'
      << "violation_step: " << format_optional(m.violation_step) << '\n'
      << "failure_step: " << format_optional(m.failure_step) << '\n'
      << "unsafe_visits: " << m.unsafe_visits << '\n'
      << "iterations: " << m.iterations << '\n'
      << "agent_steps: " << m.agent_steps << '\n'
      << "safe_size: " << m.safe_size << '\n'
      << "ergodic_size: " << m.ergodic_size << '\n'
      << "oracle_size: " << m.oracle_size << '\n'
      << "collapse_events: " << m.collapse_events << '\n';
}

void write_oracle_csv(std::ostream& out, const PreparedExperiment& prep) {
  const auto& aug = prep.world.augmented;
  const auto& layout = prep.world.grid.layout;
  out << "state,kind,cell,action,r_eps,r_zero\n";
  for (StateId s = 0; s < aug.num_states(); ++s) {
    const AugmentedState a = aug.original_of(s);
    out << s << ',' << (a.is_action_state() ? "action" : "original") << ','
        << layout.cell_of_state[a.base] << ',';
    if (a.action) out << *a.action;
    out << ',' << int(prep.oracle_eps.contains(s)) << ',' << int(prep.oracle_zero.contains(s)) << '\n';
  }
}

std::filesystem::path output_directory(const ExperimentConfig& cfg) {
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
    return std::filesystem::path(root);
  }
  return std::filesystem::path(cfg.output_dir);
}

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_explore(const std::string& config_path, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const PreparedExperiment prep = prepare_experiment(cfg);
    const auto root = output_directory(cfg);
    for (const std::uint64_t seed : cfg.seeds) {
      const ExplorationTrace trace = run_experiment_seed(cfg, prep, seed);
      const Metrics metrics = compute_metrics(trace, prep.oracle_eps);
      const auto dir = root / ("seed_" + std::to_string(seed));
      std::filesystem::create_directories(dir);
      std::ostringstream buf;
      write_trace_csv(buf, trace);
      write_file(dir / "trace.csv", buf.str());
      buf.str({});
      write_snapshots_csv(buf, trace);
      write_file(dir / "snapshots.csv", buf.str());
      buf.str({});
      write_metrics(buf, metrics, cfg.strategy, seed);
      write_file(dir / "metrics.txt", buf.str());
      buf.str({});
      write_experiment_config(buf, cfg, seed);
      write_file(dir / "manifest.ini", buf.str());
      log << "seed " << seed << ": " << to_string(metrics.terminal_reason) << ", "
          << metrics.iterations << " iterations, coverage "
          << (metrics.coverage_fraction ? format_double(*metrics.coverage_fraction) : "n/a") << '\n';
    }
  });
}

int cmd_oracle(const std::string& config_path, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const PreparedExperiment prep = prepare_experiment(cfg);
    const auto root = output_directory(cfg);
    std::filesystem::create_directories(root);
    std::ostringstream buf;
    write_oracle_csv(buf, prep);
    write_file(root / "oracle.csv", buf.str());
    log << "oracle: " << prep.oracle_eps.count() << " states at epsilon, "
        << prep.oracle_zero.count() << " at zero\n";
  });
}

}  // namespace safemdp
