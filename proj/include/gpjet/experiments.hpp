#pragma once

// Experiment recipes behind the command-line runner. Each recipe is a pure
// function of (settings, seed); artifacts are written separately.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpjet/metrology.hpp"
#include "gpjet/planner.hpp"
#include "gpjet/serialize.hpp"
#include "gpjet/virtual_machine.hpp"

namespace gpjet::exp {

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

struct RatioGrid {
  double lo = 0.1;
  double hi = 15.0;
  int n = 50;
};

struct MetrologySettings {
  int frames = 500;
  int stride = 8;
  int workers = 0;  // 0: use every available worker
  metrology::Geometry geometry{};
  int edge_jitter_px = 0;
  double lag_max_mm = 1.0;
  int hd_frames = 100;
  bool trapezoid_half_factor = false;
};

struct Settings {
  jet::DimensionlessGroups groups = jet::default_pcl_groups();
  vm::TruthOptions truth{};
  int grid_points = 93;
  RatioGrid ratio_grid{};
  std::optional<planner::AcquisitionSpec> acquisition;  // recipe default when absent
  int max_iter = 0;                                     // 0: recipe default
  double mciw_floor = 0.0;
  int max_successful = 3;
  int max_total = 40;
  planner::ModelOptions model{};
  bool log_ratio_input = true;
  int n_observations = 0;  // 0: recipe default
  int n_low = 32;
  int init_count = 3;
  double init_ratio = 5.0;
  std::string lag_variant = "n4";  // fig5c: "n4" (text) or "n3" (caption)
  MetrologySettings metrology{};
};

/// Strict parse: unknown keys and wrong types throw ConfigError.
Settings settings_from_json(const io::Json& config);

/// z stations on [0, chi].
std::vector<double> z_grid(const Settings& s);
/// Log-spaced speed ratios.
std::vector<double> ratio_grid(const Settings& s);
/// Index-rounded equispaced subset of `grid` (endpoints included).
std::vector<double> equispaced(const std::vector<double>& grid, int n);

/// Equispaced design of exactly n grid points containing every point of `high`.
std::vector<double> nested_low_design(const std::vector<double>& grid, int n, const std::vector<double>& high);
/// Grid point closest to x (first on ties).
double snap(const std::vector<double>& grid, double x);
/// Speed ratios of the stable (ratio >= 1) machine settings, ascending.
std::vector<double> stable_setting_ratios(const vm::VirtualMachine& machine);

// ---- recipe outcomes used by the runner and the acceptance checks ----

struct RegressionOutcome {
  std::vector<double> x_obs, y_obs;
  std::vector<double> grid, truth;
  std::vector<gp::Prediction> pred;
  gp::GPModel model;
  double rmse = 0.0;
  double mciw = 0.0;
};

RegressionOutcome radius_regression(const vm::VirtualMachine& machine, const Settings& s, int n, std::uint64_t seed);
RegressionOutcome lag_regression(const vm::VirtualMachine& machine, const Settings& s, int n, std::uint64_t seed);

struct MultiFidelityOutcome {
  std::vector<double> x_high, y_high, x_low, y_low;
  std::vector<double> grid, truth;
  std::vector<gp::Prediction> mf_pred, gp_pred;
  mf::MFModel mf;
  gp::GPModel gp;
  double rmse_mf = 0.0, rmse_gp = 0.0;
  double cone_rmse_mf = 0.0, rest_rmse_mf = 0.0;  // z < 2 versus z >= 2
  double cone_rmse_gp = 0.0;
};

/// n_high = 6: interior equispaced stations; n_high = 7 adds a Taylor-cone station.
MultiFidelityOutcome radius_multifidelity(const vm::VirtualMachine& machine, const Settings& s, int n_high,
                                          std::uint64_t seed);

struct ActiveLearningPair {
  std::vector<double> init;
  planner::RunRecord gp, mf;
};
ActiveLearningPair radius_active_learning(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed);

planner::RunRecord lag_active_learning(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed);

struct BayesOptOutcome {
  planner::RunRecord run;
  double true_minimizer = 0.0;
  double true_minimum = 0.0;
};
BayesOptOutcome lag_bayes_opt(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed);

struct BenchOutcome {
  std::vector<metrology::ModeReport> modes;
  std::vector<metrology::JetFeatures> features;  // parallel-scan run
  double max_diameter_error_mm = 0.0;
  double max_lag_error_mm = 0.0;
  bool worker_invariant = false;
  std::optional<metrology::ModeReport> hd;
};
BenchOutcome metrology_bench(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed);

// ---- runner ----

struct Artifacts {
  io::Json result;
  std::string trace_csv;
  std::optional<std::string> plot_svg;
  std::string run_jsonl;  // per-iteration records for planner runs
};

Artifacts run_experiment(const std::string& experiment, const Settings& settings, std::uint64_t seed, bool plot);

/// result.json, trace.csv, optional plot.svg and iterations.jsonl.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);

}  // namespace gpjet::exp
