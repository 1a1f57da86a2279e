#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "safemdp/errors.hpp"
#include "safemdp/experiment.hpp"
#include "safemdp/terrain.hpp"

namespace {

struct SynthOptions {
  std::string kind = "crater-hill";
  std::size_t rows = 30;
  std::size_t cols = 30;
  double cell_size = 1.0;
  std::uint64_t seed = 0;
  safemdp::CraterHillTerrain crater;
  std::string kernel = "matern52";
  double lengthscale = 14.5;
  double prior_std = 10.0;
  std::string output;
};

int run_synth(const SynthOptions& o) {
  try {
    safemdp::TerrainKind kind;
    if (o.kind == "crater-hill") {
      safemdp::CraterHillTerrain ch = o.crater;
      ch.seed = o.seed;
      kind = ch;
    } else {
      const auto k = o.kernel == "matern52"
                         ? safemdp::Kernel::matern52(o.lengthscale, o.prior_std)
                         : safemdp::Kernel::squared_exponential(o.lengthscale, o.prior_std);
      kind = safemdp::GpSampleTerrain{k, o.seed};
    }
    const auto grid = safemdp::synth_terrain(kind, o.rows, o.cols, o.cell_size);
    safemdp::write_esri_ascii_file(o.output, grid);
    std::cout << "wrote " << o.rows << "x" << o.cols << " grid to " << o.output << '\n';
    return 0;
  } catch (const safemdp::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe exploration in finite MDPs with GP safety models"};
  app.require_subcommand(1);

  std::string config_path;
  auto* explore = app.add_subcommand("explore", "Run the configured strategy for every seed");
  explore->add_option("config", config_path, "INI experiment config")->required();
  auto* oracle = app.add_subcommand("oracle", "Write the reach oracle of the configured world");
  oracle->add_option("config", config_path, "INI experiment config")->required();

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write a synthetic terrain as an ESRI ASCII grid");
  synth->add_option("--kind", so.kind, "crater-hill or gp-sample")
      ->check(CLI::IsMember({"crater-hill", "gp-sample"}));
  synth->add_option("--rows", so.rows)->check(CLI::PositiveNumber);
  synth->add_option("--cols", so.cols)->check(CLI::PositiveNumber);
  synth->add_option("--cell-size", so.cell_size)->check(CLI::PositiveNumber);
  synth->add_option("--seed", so.seed);
  synth->add_option("--slope-x", so.crater.slope_x);
  synth->add_option("--slope-y", so.crater.slope_y);
  synth->add_option("--hill-row", so.crater.hill_row);
  synth->add_option("--hill-col", so.crater.hill_col);
  synth->add_option("--hill-height", so.crater.hill_height);
  synth->add_option("--hill-radius", so.crater.hill_radius)->check(CLI::PositiveNumber);
  synth->add_option("--crater-row", so.crater.crater_row);
  synth->add_option("--crater-col", so.crater.crater_col);
  synth->add_option("--crater-depth", so.crater.crater_depth);
  synth->add_option("--crater-radius", so.crater.crater_radius)->check(CLI::PositiveNumber);
  synth->add_option("--roughness", so.crater.roughness)->check(CLI::NonNegativeNumber);
  synth->add_option("--kernel", so.kernel, "matern52 or squared-exponential")
      ->check(CLI::IsMember({"matern52", "squared-exponential"}));
  synth->add_option("--lengthscale", so.lengthscale)->check(CLI::PositiveNumber);
  synth->add_option("--prior-std", so.prior_std)->check(CLI::PositiveNumber);
  synth->add_option("-o,--output", so.output, "Output .asc path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*explore) return safemdp::cmd_explore(config_path, std::cout, std::cerr);
  if (*oracle) return safemdp::cmd_oracle(config_path, std::cout, std::cerr);
  return run_synth(so);
}
