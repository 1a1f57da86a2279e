#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "safemdp/errors.hpp"
#include "safemdp/experiment.hpp"
#include "safemdp/gp.hpp"
#include "safemdp/reach.hpp"
#include "safemdp/terrain.hpp"

namespace py = pybind11;
using namespace safemdp;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix heights_of(const TerrainGrid& grid) {
  RowMatrix out(grid.rows, grid.cols);
  for (std::size_t i = 0; i < grid.num_cells(); ++i) {
    out(i / grid.cols, i % grid.cols) = grid.nodata[i] ? std::nan("") : grid.heights[i];
  }
  return out;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["coverage_fraction"] = m.coverage_fraction;
  d["violation_step"] = m.violation_step;
  d["failure_step"] = m.failure_step;
  d["unsafe_visits"] = m.unsafe_visits;
  d["iterations"] = m.iterations;
  d["agent_steps"] = m.agent_steps;
  d["terminal_reason"] = std::string(to_string(m.terminal_reason));
  d["safe_size"] = m.safe_size;
  d["ergodic_size"] = m.ergodic_size;
  d["oracle_size"] = m.oracle_size;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Safe exploration in finite MDPs with GP safety models";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Kernel>(m, "Kernel")
      .def_static("matern52", &Kernel::matern52, py::arg("lengthscale"), py::arg("prior_std"))
      .def_static("squared_exponential", &Kernel::squared_exponential, py::arg("lengthscale"),
                  py::arg("prior_std"))
      .def_readonly("lengthscale", &Kernel::lengthscale)
      .def_readonly("prior_std", &Kernel::prior_std)
      .def("__call__", &Kernel::operator(), py::arg("distance"));

  m.def(
      "gp_posterior",
      [](const Kernel& kernel, const RowMatrix& points, double noise_std,
         const std::vector<PointId>& observed, const std::vector<double>& values,
         const std::vector<PointId>& queries) {
        if (observed.size() != values.size()) {
          throw DomainError("observed and values differ in length");
        }
        for (auto p : observed) {
          if (p >= static_cast<PointId>(points.rows())) throw DomainError("observed index out of range");
        }
        for (auto q : queries) {
          if (q >= static_cast<PointId>(points.rows())) throw DomainError("query index out of range");
        }
        const RowMatrix pts = points;
        auto dist = [pts](PointId a, PointId b) { return (pts.row(a) - pts.row(b)).norm(); };
        const GpModel gp = GpModel::from_batch(metric_covariance(kernel, dist), noise_std, observed, values);
        const Posterior post = gp.posterior(queries);
        return py::make_tuple(post.mean, post.variance);
      },
      py::arg("kernel"), py::arg("points"), py::arg("noise_std"), py::arg("observed"),
      py::arg("values"), py::arg("queries"),
      "Posterior mean and variance at `queries` (row indices of `points`).");

  m.def(
      "crater_hill",
      [](std::size_t rows, std::size_t cols, double cell_size, const CraterHillTerrain& p) {
        return heights_of(synth_terrain(p, rows, cols, cell_size));
      },
      py::arg("rows"), py::arg("cols"), py::arg("cell_size"), py::arg("params"));

  py::class_<CraterHillTerrain>(m, "CraterHillTerrain")
      .def(py::init<>())
      .def_readwrite("slope_x", &CraterHillTerrain::slope_x)
      .def_readwrite("slope_y", &CraterHillTerrain::slope_y)
      .def_readwrite("hill_row", &CraterHillTerrain::hill_row)
      .def_readwrite("hill_col", &CraterHillTerrain::hill_col)
      .def_readwrite("hill_height", &CraterHillTerrain::hill_height)
      .def_readwrite("hill_radius", &CraterHillTerrain::hill_radius)
      .def_readwrite("crater_row", &CraterHillTerrain::crater_row)
      .def_readwrite("crater_col", &CraterHillTerrain::crater_col)
      .def_readwrite("crater_depth", &CraterHillTerrain::crater_depth)
      .def_readwrite("crater_radius", &CraterHillTerrain::crater_radius)
      .def_readwrite("roughness", &CraterHillTerrain::roughness)
      .def_readwrite("seed", &CraterHillTerrain::seed);

  m.def(
      "load_esri_ascii",
      [](const std::string& text) {
        const TerrainGrid grid = load_esri_ascii(text);
        py::dict d;
        d["heights"] = heights_of(grid);
        d["cell_size"] = grid.cell_size;
        d["xllcorner"] = grid.xllcorner;
        d["yllcorner"] = grid.yllcorner;
        return d;
      },
      py::arg("text"), "Parses ESRI ASCII text; nodata cells become NaN.");

  m.def(
      "reach_oracle",
      [](const std::string& config_text) {
        const PreparedExperiment prep = prepare_experiment(parse_experiment_config(config_text));
        return py::make_tuple(prep.oracle_eps.count(), prep.oracle_zero.count());
      },
      py::arg("config"), "Sizes of the reach oracle at epsilon and at zero.");

  m.def(
      "run_experiment",
      [](const std::string& config_text, std::uint64_t seed) {
        const ExperimentConfig cfg = parse_experiment_config(config_text);
        const PreparedExperiment prep = prepare_experiment(cfg);
        const ExplorationTrace trace = [&] {
          py::gil_scoped_release release;
          return run_experiment_seed(cfg, prep, seed);
        }();
        py::dict d = metrics_dict(compute_metrics(trace, prep.oracle_eps));
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        d["trace_csv"] = csv.str();
        return d;
      },
      py::arg("config"), py::arg("seed") = 0,
      "Runs one seed of an INI experiment config given as text.");

  m.def(
      "explore",
      [](const std::string& config_path) {
        std::ostringstream log;
        std::ostringstream err;
        const int status = cmd_explore(config_path, log, err);
        return py::make_tuple(status, log.str(), err.str());
      },
      py::arg("config_path"), "Same as `safemdp explore`; returns (status, log, errors).");
}
