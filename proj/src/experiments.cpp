#include "gpjet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gpjet/errors.hpp"
#include "gpjet/format.hpp"
#include "gpjet/plot.hpp"

namespace gpjet::exp {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig5a", "fig5b", "fig5c", "fig5d", "fig6a",
                                              "fig6b", "fig7",  "fig8",  "fig9",  "metrology-bench"};
  return names;
}

bool is_experiment(const std::string& name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

// ---------------------------------------------------------------- config

namespace {

using io::Json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

double number(const Json& v, const std::string& key) {
  if (!v.is_number()) config_error(key + " must be a number");
  return v.get<double>();
}

int integer(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) config_error(key + " must be an integer");
  return v.get<int>();
}

bool boolean(const Json& v, const std::string& key) {
  if (!v.is_boolean()) config_error(key + " must be true or false");
  return v.get<bool>();
}

const Json& object(const Json& v, const std::string& key) {
  if (!v.is_object()) config_error(key + " must be an object");
  return v;
}

}  // namespace

Settings settings_from_json(const Json& config) {
  Settings s;
  if (config.is_null()) return s;
  object(config, "config");
  for (const auto& [key, v] : config.items()) {
    if (key == "experiment" || key == "seed") {
      continue;  // handled by the runner
    } else if (key == "groups") {
      s.groups = io::groups_from_json(v, s.groups);
    } else if (key == "truth") {
      for (const auto& [k, x] : object(v, key).items()) {
        const std::string name = "truth." + k;
        if (k == "bump_amplitude") s.truth.bump_amplitude = number(x, name);
        else if (k == "bump_scale") s.truth.bump_scale = number(x, name);
        else if (k == "sigma_radius") s.truth.sigma_radius = number(x, name);
        else if (k == "sigma_lag") s.truth.sigma_lag = number(x, name);
        else if (k == "jet_speed_mm_s") s.truth.jet_speed_mm_s = number(x, name);
        else if (k == "lag_offset_mm") s.truth.lag_offset_mm = number(x, name);
        else if (k == "lag_scale_mm") s.truth.lag_scale_mm = number(x, name);
        else config_error("unknown key " + name);
      }
    } else if (key == "grid_points") {
      s.grid_points = integer(v, key);
    } else if (key == "ratio_grid") {
      for (const auto& [k, x] : object(v, key).items()) {
        if (k == "lo") s.ratio_grid.lo = number(x, "ratio_grid.lo");
        else if (k == "hi") s.ratio_grid.hi = number(x, "ratio_grid.hi");
        else if (k == "n") s.ratio_grid.n = integer(x, "ratio_grid.n");
        else config_error("unknown key ratio_grid." + k);
      }
    } else if (key == "acquisition") {
      planner::AcquisitionSpec spec;
      for (const auto& [k, x] : object(v, key).items()) {
        if (k == "kind") {
          if (!x.is_string()) config_error("acquisition.kind must be a string");
          spec.kind = planner::acquisition_from_string(x.get<std::string>());
        } else if (k == "xi") {
          spec.xi = number(x, "acquisition.xi");
        } else if (k == "kappa") {
          spec.kappa = number(x, "acquisition.kappa");
        } else {
          config_error("unknown key acquisition." + k);
        }
      }
      s.acquisition = spec;
    } else if (key == "termination") {
      for (const auto& [k, x] : object(v, key).items()) {
        if (k == "max_iter") s.max_iter = integer(x, "termination.max_iter");
        else if (k == "mciw_floor") s.mciw_floor = number(x, "termination.mciw_floor");
        else if (k == "max_successful") s.max_successful = integer(x, "termination.max_successful");
        else if (k == "max_total") s.max_total = integer(x, "termination.max_total");
        else config_error("unknown key termination." + k);
      }
    } else if (key == "model") {
      for (const auto& [k, x] : object(v, key).items()) {
        if (k == "restarts") s.model.restarts = integer(x, "model.restarts");
        else if (k == "min_train_points") s.model.min_train_points = static_cast<std::size_t>(integer(x, "model.min_train_points"));
        else if (k == "lengthscale") s.model.prior.lengthscale = number(x, "model.lengthscale");
        else if (k == "signal_variance") s.model.prior.signal_variance = number(x, "model.signal_variance");
        else if (k == "noise_variance") s.model.prior.noise_variance = number(x, "model.noise_variance");
        else if (k == "log_ratio_input") s.log_ratio_input = boolean(x, "model.log_ratio_input");
        else config_error("unknown key model." + k);
      }
    } else if (key == "n_observations") {
      s.n_observations = integer(v, key);
    } else if (key == "n_low") {
      s.n_low = integer(v, key);
    } else if (key == "init_count") {
      s.init_count = integer(v, key);
    } else if (key == "init_ratio") {
      s.init_ratio = number(v, key);
    } else if (key == "lag_variant") {
      if (!v.is_string() || (v != "n3" && v != "n4")) config_error("lag_variant must be \"n3\" or \"n4\"");
      s.lag_variant = v.get<std::string>();
    } else if (key == "metrology") {
      auto& m = s.metrology;
      for (const auto& [k, x] : object(v, key).items()) {
        const std::string name = "metrology." + k;
        if (k == "frames") m.frames = integer(x, name);
        else if (k == "stride") m.stride = integer(x, name);
        else if (k == "workers") m.workers = integer(x, name);
        else if (k == "cf") m.geometry.cf = number(x, name);
        else if (k == "width") m.geometry.width = integer(x, name);
        else if (k == "height") m.geometry.height = integer(x, name);
        else if (k == "nozzle_x") m.geometry.nozzle_x = integer(x, name);
        else if (k == "collector_row") m.geometry.collector_row = integer(x, name);
        else if (k == "fps") m.geometry.fps = number(x, name);
        else if (k == "nozzle_radius_mm") m.geometry.nozzle_radius_mm = number(x, name);
        else if (k == "edge_jitter_px") m.edge_jitter_px = integer(x, name);
        else if (k == "lag_max_mm") m.lag_max_mm = number(x, name);
        else if (k == "hd_frames") m.hd_frames = integer(x, name);
        else if (k == "trapezoid_half_factor") m.trapezoid_half_factor = boolean(x, name);
        else config_error("unknown key " + name);
      }
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  if (s.grid_points < 16) config_error("grid_points must be at least 16");
  if (!(s.ratio_grid.lo > 0.0 && s.ratio_grid.hi > s.ratio_grid.lo && s.ratio_grid.n >= 2))
    config_error("ratio_grid must satisfy 0 < lo < hi and n >= 2");
  if (s.n_low < 2) config_error("n_low must be at least 2");
  if (s.init_count < 1) config_error("init_count must be at least 1");
  if (!(s.init_ratio > 0.0)) config_error("init_ratio must be positive");
  if (s.max_iter < 0 || s.max_successful < 1 || s.max_total < 1) config_error("termination limits must be positive");
  if (s.model.restarts < 1) config_error("model.restarts must be at least 1");
  if (s.metrology.frames < 0 || s.metrology.stride < 1 || s.metrology.workers < 0 || s.metrology.hd_frames < 0)
    config_error("metrology counts must be non-negative and stride at least 1");
  return s;
}

// ---------------------------------------------------------------- grids

std::vector<double> z_grid(const Settings& s) {
  std::vector<double> z(static_cast<std::size_t>(s.grid_points));
  for (int i = 0; i < s.grid_points; ++i) z[static_cast<std::size_t>(i)] = s.groups.chi * i / (s.grid_points - 1);
  return z;
}

std::vector<double> ratio_grid(const Settings& s) {
  const auto& g = s.ratio_grid;
  std::vector<double> r(static_cast<std::size_t>(g.n));
  const double a = std::log(g.lo), b = std::log(g.hi);
  for (int i = 0; i < g.n; ++i) r[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (g.n - 1));
  r.front() = g.lo;
  r.back() = g.hi;
  return r;
}

std::vector<double> equispaced(const std::vector<double>& grid, int n) {
  require(!grid.empty() && n >= 1, "equispaced subset needs a grid and n >= 1");
  if (static_cast<std::size_t>(n) >= grid.size()) return grid;
  if (n == 1) return {grid.front()};
  std::vector<double> out;
  const double last = static_cast<double>(grid.size() - 1);
  for (int k = 0; k < n; ++k) out.push_back(grid[static_cast<std::size_t>(std::lround(last * k / (n - 1)))]);
  return out;
}

double snap(const std::vector<double>& grid, double x) {
  require(!grid.empty(), "empty grid");
  double best = grid.front();
  for (double g : grid)
    if (std::abs(g - x) < std::abs(best - x)) best = g;
  return best;
}

// Equispaced low design of exactly n points that contains every high point:
// each high point replaces its nearest still-free design point.
std::vector<double> nested_low_design(const std::vector<double>& grid, int n, const std::vector<double>& high) {
  std::vector<double> low = equispaced(grid, n);
  require(high.size() <= low.size(), "more high-fidelity points than low-fidelity points");
  std::vector<bool> taken(low.size(), false);
  for (double x : high) {
    std::size_t best = low.size();
    for (std::size_t k = 0; k < low.size(); ++k)
      if (!taken[k] && (best == low.size() || std::abs(low[k] - x) < std::abs(low[best] - x))) best = k;
    low[best] = x;
    taken[best] = true;
  }
  std::sort(low.begin(), low.end());
  return low;
}

std::vector<double> stable_setting_ratios(const vm::VirtualMachine& machine) {
  std::vector<double> r;
  for (const auto& s : vm::list_settings()) {
    const double u = machine.speed_ratio(s);
    if (u >= 1.0) r.push_back(u);
  }
  std::sort(r.begin(), r.end());
  return r;
}

// ---------------------------------------------------------------- recipes

namespace {

std::vector<double> stable_only(const std::vector<double>& ratios) {
  std::vector<double> out;
  std::copy_if(ratios.begin(), ratios.end(), std::back_inserter(out), [](double r) { return r >= 1.0; });
  return out;
}

double rmse(const std::vector<gp::Prediction>& pred, const std::vector<double>& truth,
            const std::vector<double>& grid, double lo, double hi) {
  double se = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < lo || grid[i] >= hi) continue;
    const double d = pred[i].mean - truth[i];
    se += d * d;
    ++n;
  }
  return n ? std::sqrt(se / n) : 0.0;
}

gp::FitOptions fit_options(const Settings& s, std::uint64_t seed, gp::Interval domain) {
  gp::FitOptions f;
  f.init = s.model.prior;
  f.restarts = s.model.restarts;
  f.seed = seed;
  f.domain = domain;
  return f;
}

planner::ModelOptions ratio_model(const Settings& s) {
  planner::ModelOptions m = s.model;
  m.log_input = s.log_ratio_input;
  return m;
}

double ratio_input(const Settings& s, double r) { return s.log_ratio_input ? std::log(r) : r; }

}  // namespace

RegressionOutcome radius_regression(const vm::VirtualMachine& machine, const Settings& s, int n, std::uint64_t seed) {
  require(n >= 1, "need at least one observation");
  RegressionOutcome o;
  o.grid = z_grid(s);
  o.x_obs = equispaced(o.grid, n);
  o.y_obs = machine.observe_radius(o.x_obs, seed);
  o.model = gp::fit(o.x_obs, o.y_obs, fit_options(s, seed, {0.0, s.groups.chi}));
  for (double z : o.grid) {
    o.truth.push_back(machine.radius_truth(z));
    o.pred.push_back(o.model.predict(z));
  }
  const planner::Metrics m = planner::metrics(o.pred, o.truth);
  o.rmse = m.rmse;
  o.mciw = m.mciw;
  return o;
}

RegressionOutcome lag_regression(const vm::VirtualMachine& machine, const Settings& s, int n, std::uint64_t seed) {
  require(n >= 1, "need at least one observation");
  RegressionOutcome o;
  o.x_obs = equispaced(stable_setting_ratios(machine), n);
  for (double r : o.x_obs) o.y_obs.push_back(machine.observe_lag(r, seed));
  std::vector<double> u;
  for (double r : o.x_obs) u.push_back(ratio_input(s, r));
  const gp::Interval dom{ratio_input(s, s.ratio_grid.lo), ratio_input(s, s.ratio_grid.hi)};
  o.model = gp::fit(u, o.y_obs, fit_options(s, seed, dom));
  o.grid = stable_only(ratio_grid(s));
  for (double r : o.grid) {
    o.truth.push_back(machine.lag_truth(r));
    o.pred.push_back(o.model.predict(ratio_input(s, r)));
  }
  const planner::Metrics m = planner::metrics(o.pred, o.truth);
  o.rmse = m.rmse;
  o.mciw = m.mciw;
  return o;
}

MultiFidelityOutcome radius_multifidelity(const vm::VirtualMachine& machine, const Settings& s, int n_high,
                                          std::uint64_t seed) {
  require(n_high >= 2, "multi-fidelity needs at least two high-fidelity points");
  MultiFidelityOutcome o;
  o.grid = z_grid(s);
  const double chi = s.groups.chi;
  const bool cone = n_high >= 7;
  const int interior = cone ? n_high - 1 : n_high;
  for (int k = 0; k < interior; ++k) o.x_high.push_back(snap(o.grid, (k + 1) * chi / (interior + 1)));
  if (cone) o.x_high.push_back(snap(o.grid, 1.0));
  std::sort(o.x_high.begin(), o.x_high.end());
  o.y_high = machine.observe_radius(o.x_high, seed);

  o.x_low = nested_low_design(o.grid, s.n_low, o.x_high);
  for (double x : o.x_low) o.y_low.push_back(machine.radius_physics(x));

  mf::MFOptions mopt;
  mopt.fit = fit_options(s, seed, {0.0, chi});
  o.mf = mf::fit_mf(o.x_low, o.y_low, o.x_high, o.y_high, mopt);
  o.gp = gp::fit(o.x_high, o.y_high, fit_options(s, seed, {0.0, chi}));
  for (double z : o.grid) {
    o.truth.push_back(machine.radius_truth(z));
    o.mf_pred.push_back(mf::predict_mf(o.mf, z));
    o.gp_pred.push_back(o.gp.predict(z));
  }
  const double inf = std::numeric_limits<double>::infinity();
  o.rmse_mf = rmse(o.mf_pred, o.truth, o.grid, -inf, inf);
  o.rmse_gp = rmse(o.gp_pred, o.truth, o.grid, -inf, inf);
  o.cone_rmse_mf = rmse(o.mf_pred, o.truth, o.grid, -inf, 2.0);
  o.rest_rmse_mf = rmse(o.mf_pred, o.truth, o.grid, 2.0, inf);
  o.cone_rmse_gp = rmse(o.gp_pred, o.truth, o.grid, -inf, 2.0);
  return o;
}

ActiveLearningPair radius_active_learning(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed) {
  planner::ActiveLearningSetup a;
  a.candidates = z_grid(s);
  a.domain = {0.0, s.groups.chi};
  a.oracle = [&machine](double z, std::uint64_t q) {
    const double zz[1] = {z};
    return machine.observe_radius(zz, q)[0];
  };
  a.spec = s.acquisition.value_or(planner::AcquisitionSpec{});
  a.init_points = planner::draw_initial_points(a.candidates, static_cast<std::size_t>(s.init_count), seed);
  a.max_iter = s.max_iter > 0 ? s.max_iter : 6;
  a.mciw_floor = s.mciw_floor;
  a.eval_grid = a.candidates;
  for (double z : a.eval_grid) a.truth.push_back(machine.radius_truth(z));
  a.model = s.model;
  a.seed = seed;

  ActiveLearningPair out;
  out.init = a.init_points;
  out.gp = planner::run_active_learning(a);
  a.use_mf = true;
  a.low_fidelity = [&machine](double z) { return machine.radius_physics(z); };
  a.low_design = equispaced(a.candidates, s.n_low);
  out.mf = planner::run_active_learning(a);
  return out;
}

planner::RunRecord lag_active_learning(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed) {
  planner::ActiveLearningSetup a;
  a.candidates = stable_only(ratio_grid(s));
  require(!a.candidates.empty(), "ratio grid has no stable points");
  a.domain = {a.candidates.front(), a.candidates.back()};
  a.oracle = [&machine](double r, std::uint64_t q) { return machine.observe_lag(r, q); };
  a.spec = s.acquisition.value_or(planner::AcquisitionSpec{});
  a.init_points = {s.init_ratio};
  a.max_iter = s.max_iter > 0 ? s.max_iter : 4;
  a.mciw_floor = s.mciw_floor;
  a.eval_grid = a.candidates;
  for (double r : a.eval_grid) a.truth.push_back(machine.lag_truth(r));
  a.model = ratio_model(s);
  a.seed = seed;
  return planner::run_active_learning(a);
}

BayesOptOutcome lag_bayes_opt(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed) {
  planner::BayesOptSetup b;
  b.candidates = ratio_grid(s);
  b.domain = {s.ratio_grid.lo, s.ratio_grid.hi};
  b.oracle = [&machine](double r, std::uint64_t q) { return machine.observe_lag(r, q); };
  if (s.acquisition) b.spec = *s.acquisition;
  b.init_points = {s.init_ratio};
  b.max_successful = s.max_successful;
  b.max_total = s.max_total;
  b.truth_fn = [&machine](double r) { return machine.lag_truth(r); };
  b.eval_grid = stable_only(b.candidates);
  for (double r : b.eval_grid) b.truth.push_back(machine.lag_truth(r));
  b.model = ratio_model(s);
  b.seed = seed;

  BayesOptOutcome o;
  const auto best = std::min_element(b.truth.begin(), b.truth.end());
  require(best != b.truth.end(), "ratio grid has no stable points");
  o.true_minimizer = b.eval_grid[static_cast<std::size_t>(best - b.truth.begin())];
  o.true_minimum = *best;
  b.true_optimum = o.true_minimum;
  o.run = planner::run_bayesian_optimization(b);
  return o;
}

BenchOutcome metrology_bench(const vm::VirtualMachine& machine, const Settings& s, std::uint64_t seed) {
  const MetrologySettings& m = s.metrology;
  // Rendered silhouettes need R(0) = 1, so the bump-free physics profile is drawn.
  jet::RadiusProfile profile;
  profile.z_grid = z_grid(s);
  for (double z : profile.z_grid) profile.radii.push_back(machine.radius_physics(z));

  const auto lag_of = [&](int i) { return m.frames > 1 ? m.lag_max_mm * i / (m.frames - 1) : 0.0; };
  const auto make_source = [&](const metrology::Geometry& g, int count) {
    return [&, g, count, i = 0]() mutable -> std::optional<metrology::Frame> {
      if (i >= count) return std::nullopt;
      const metrology::RenderNoise noise{m.edge_jitter_px, planner::query_seed(seed, static_cast<std::uint64_t>(i))};
      return metrology::render_synthetic_frame(profile, lag_of(i++), g, noise);
    };
  };
  metrology::ScanOptions scan;
  scan.trapezoid_half_factor = m.trapezoid_half_factor;
  const int workers = m.workers > 0 ? m.workers : metrology::worker_cap();

  BenchOutcome out;
  out.worker_invariant = true;
  std::string reference;
  for (auto mode : {metrology::ExecutionMode::Sequential, metrology::ExecutionMode::PipelinedIO,
                    metrology::ExecutionMode::ParallelScan}) {
    auto res = metrology::process_stream(make_source(m.geometry, m.frames), m.stride, workers, mode, scan);
    out.modes.push_back(res.report);
    const std::string csv = metrology::features_csv(res.features) + [&] {
      std::string lags;
      for (const auto& f : res.features) lags += f.lag_mm ? shortest(*f.lag_mm) + '\n' : "-\n";
      return lags;
    }();
    if (mode == metrology::ExecutionMode::Sequential)
      reference = csv;
    else
      out.worker_invariant = out.worker_invariant && csv == reference;
    if (mode == metrology::ExecutionMode::ParallelScan) out.features = std::move(res.features);
  }

  // Round-trip errors against the rendered geometry.
  const auto& g = m.geometry;
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    const auto& f = out.features[i];
    for (const auto& row : f.rows) {
      const double expected = 2.0 * metrology::profile_radius_at(profile, row.row * g.cf / g.nozzle_radius_mm) *
                              g.nozzle_radius_mm;
      out.max_diameter_error_mm = std::max(out.max_diameter_error_mm, std::abs(row.diameter_mm - expected));
    }
    if (f.lag_mm)
      out.max_lag_error_mm = std::max(out.max_lag_error_mm, std::abs(*f.lag_mm - lag_of(static_cast<int>(i))));
    else
      out.max_lag_error_mm = std::numeric_limits<double>::infinity();
  }

  if (m.hd_frames > 0) {
    metrology::Geometry hd;
    hd.width = 1920;
    hd.height = 1080;
    hd.nozzle_x = 960;
    hd.collector_row = 1040;
    hd.fps = g.fps;
    hd.nozzle_radius_mm = g.nozzle_radius_mm;
    hd.cf = s.groups.chi * g.nozzle_radius_mm / 1000.0;
    auto res = metrology::process_stream(make_source(hd, m.hd_frames), m.stride, workers,
                                         metrology::ExecutionMode::ParallelScan, scan);
    out.hd = res.report;
  }
  return out;
}

// ---------------------------------------------------------------- runner

namespace {

Json predictions_json(const std::vector<gp::Prediction>& p) {
  Json mean = Json::array(), var = Json::array();
  for (const auto& q : p) {
    mean.push_back(q.mean);
    var.push_back(q.variance);
  }
  return Json{{"mean", mean}, {"variance", var}};
}

std::vector<double> sds(const std::vector<gp::Prediction>& p) {
  std::vector<double> out;
  for (const auto& q : p) out.push_back(std::sqrt(std::max(q.variance, 0.0)));
  return out;
}

std::vector<double> means(const std::vector<gp::Prediction>& p) {
  std::vector<double> out;
  for (const auto& q : p) out.push_back(q.mean);
  return out;
}

Json mode_json(const metrology::ModeReport& r) {
  return Json{{"mode", std::string(metrology::to_string(r.mode))},
              {"frames", r.frames},
              {"workers", r.workers},
              {"mean_frame_s", r.mean_frame_s},
              {"p95_frame_s", r.p95_frame_s},
              {"wall_s", r.wall_s},
              {"throughput_frame_s", r.throughput_frame_s}};
}

// Refits the final surrogate of a planner run for plotting.
planner::Surrogate final_model(const planner::RunRecord& rec, const gp::Interval& domain,
                               const planner::ModelOptions& opt, std::uint64_t seed, bool use_mf = false,
                               const std::function<double(double)>& low = {}, std::span<const double> low_design = {}) {
  std::vector<double> xs, ys;
  for (const auto& r : rec.iterations)
    if (r.y) {
      xs.push_back(r.x);
      ys.push_back(*r.y);
    }
  if (xs.empty()) fail(ErrorCode::EmptyTrace, "run produced no observations");
  return planner::build_surrogate(xs, ys, domain, opt, seed, use_mf, low, low_design);
}

plot::PlotTrace surrogate_trace(const planner::Surrogate& m, const std::vector<double>& grid,
                                const planner::RunRecord& rec, bool log_input) {
  plot::PlotTrace t;
  for (double x : grid) {
    const gp::Prediction p = m.predict(log_input ? std::log(x) : x);
    t.x.push_back(x);
    t.mean.push_back(p.mean);
    t.sd.push_back(std::sqrt(std::max(p.variance, 0.0)));
  }
  for (const auto& r : rec.iterations)
    if (r.y) {
      t.obs_x.push_back(r.x);
      t.obs_y.push_back(*r.y);
    }
  return t;
}

std::string regression_csv(const std::vector<double>& grid, const std::vector<double>& truth,
                           const std::vector<gp::Prediction>& pred, const char* xname) {
  std::string out = std::string(xname) + ",truth,mean,sd\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out += shortest(grid[i]) + ',' + shortest(truth[i]) + ',' + shortest(pred[i].mean) + ',' +
           shortest(std::sqrt(std::max(pred[i].variance, 0.0))) + '\n';
  return out;
}

int default_n(const std::string& e, const Settings& s) {
  if (s.n_observations > 0) return s.n_observations;
  if (e == "fig5a") return 5;
  if (e == "fig5b") return 10;
  if (e == "fig5c") return s.lag_variant == "n3" ? 3 : 4;
  if (e == "fig5d") return 12;
  if (e == "fig6a") return 6;
  return 7;
}

}  // namespace

Artifacts run_experiment(const std::string& e, const Settings& s, std::uint64_t seed, bool with_plot) {
  if (!is_experiment(e)) fail(ErrorCode::ConfigError, "unknown experiment '" + e + "'");
  const vm::VirtualMachine machine(s.groups, s.truth);
  Artifacts a;
  a.result = Json{{"experiment", e}, {"seed", seed}};

  if (e == "fig5a" || e == "fig5b" || e == "fig5c" || e == "fig5d") {
    const bool radius = e == "fig5a" || e == "fig5b";
    const int n = default_n(e, s);
    const RegressionOutcome o = radius ? radius_regression(machine, s, n, seed) : lag_regression(machine, s, n, seed);
    a.result["n"] = o.x_obs.size();
    a.result["rmse"] = o.rmse;
    a.result["mciw"] = o.mciw;
    a.result["model"] = io::gp_summary(o.model);
    a.result["observations"] = Json{{"x", o.x_obs}, {"y", o.y_obs}};
    a.result["prediction"] = predictions_json(o.pred);
    a.trace_csv = regression_csv(o.grid, o.truth, o.pred, radius ? "z" : "ratio");
    if (with_plot) {
      plot::PlotTrace t{o.grid, means(o.pred), sds(o.pred), o.x_obs, o.y_obs,
                        e + (radius ? ": jet radius" : ": lag distance"), radius ? "Z/R0" : "Uc/Vjm",
                        radius ? "R/R0" : "lag [mm]"};
      a.plot_svg = plot::emit_plot(t, plot::PlotKind::Posterior);
    }
  } else if (e == "fig6a" || e == "fig6b") {
    const MultiFidelityOutcome o = radius_multifidelity(machine, s, default_n(e, s), seed);
    a.result["n_high"] = o.x_high.size();
    a.result["n_low"] = o.x_low.size();
    a.result["rmse_mf"] = o.rmse_mf;
    a.result["rmse_gp"] = o.rmse_gp;
    a.result["cone_rmse_mf"] = o.cone_rmse_mf;
    a.result["rest_rmse_mf"] = o.rest_rmse_mf;
    a.result["cone_rmse_gp"] = o.cone_rmse_gp;
    a.result["mf"] = io::mf_summary(o.mf);
    a.result["gp"] = io::gp_summary(o.gp);
    a.result["high_fidelity"] = Json{{"x", o.x_high}, {"y", o.y_high}};
    a.trace_csv = "z,truth,low,mf_mean,mf_sd,gp_mean,gp_sd\n";
    for (std::size_t i = 0; i < o.grid.size(); ++i)
      a.trace_csv += shortest(o.grid[i]) + ',' + shortest(o.truth[i]) + ',' +
                     shortest(machine.radius_physics(o.grid[i])) + ',' + shortest(o.mf_pred[i].mean) + ',' +
                     shortest(std::sqrt(o.mf_pred[i].variance)) + ',' + shortest(o.gp_pred[i].mean) + ',' +
                     shortest(std::sqrt(o.gp_pred[i].variance)) + '\n';
    if (with_plot) {
      plot::PlotTrace t{o.grid, means(o.mf_pred), sds(o.mf_pred), o.x_high, o.y_high,
                        e + ": multi-fidelity radius", "Z/R0", "R/R0"};
      a.plot_svg = plot::emit_plot(t, plot::PlotKind::Posterior);
    }
  } else if (e == "fig7") {
    const ActiveLearningPair p = radius_active_learning(machine, s, seed);
    a.result["init"] = p.init;
    a.result["gp"] = io::to_json(p.gp);
    a.result["mf"] = io::to_json(p.mf);
    if (!p.gp.iterations.empty() && !p.mf.iterations.empty()) {
      a.result["final_rmse_gp"] = p.gp.iterations.back().rmse;
      a.result["final_rmse_mf"] = p.mf.iterations.back().rmse;
      a.result["final_mciw_gp"] = p.gp.iterations.back().mciw;
      a.result["final_mciw_mf"] = p.mf.iterations.back().mciw;
    }
    a.trace_csv = "model," + io::run_csv(planner::RunRecord{}, true);
    for (const auto& [name, rec] : {std::pair{"gp", &p.gp}, std::pair{"mf", &p.mf}}) {
      std::string body = io::run_csv(*rec, false);
      std::size_t start = 0;
      while (start < body.size()) {
        const std::size_t end = body.find('\n', start);
        a.trace_csv += std::string(name) + ',' + body.substr(start, end - start + 1);
        start = end + 1;
      }
      for (const auto& r : rec->iterations) {
        Json line = io::to_json(r);
        line["model"] = name;
        a.run_jsonl += line.dump() + '\n';
      }
    }
    if (with_plot && !p.mf.aborted) {
      const auto grid = z_grid(s);
      const auto low_design = equispaced(grid, s.n_low);
      const auto m = final_model(p.mf, {0.0, s.groups.chi}, s.model, seed, true,
                                 [&machine](double z) { return machine.radius_physics(z); }, low_design);
      plot::PlotTrace t = surrogate_trace(m, grid, p.mf, false);
      t.title = "fig7: active learning (multi-fidelity)";
      t.x_label = "Z/R0";
      t.y_label = "R/R0";
      a.plot_svg = plot::emit_plot(t, plot::PlotKind::Posterior);
    }
  } else if (e == "fig8") {
    const planner::RunRecord rec = lag_active_learning(machine, s, seed);
    a.result["run"] = io::to_json(rec);
    if (!rec.iterations.empty()) {
      a.result["initial_rmse"] = rec.iterations.front().rmse;
      a.result["final_rmse"] = rec.iterations.back().rmse;
    }
    a.trace_csv = io::run_csv(rec);
    a.run_jsonl = io::run_jsonl(rec);
    if (with_plot && !rec.aborted) {
      const auto grid = stable_only(ratio_grid(s));
      const auto m = final_model(rec, {grid.front(), grid.back()}, ratio_model(s), seed);
      plot::PlotTrace t = surrogate_trace(m, grid, rec, s.log_ratio_input);
      t.title = "fig8: active learning of lag distance";
      t.x_label = "Uc/Vjm";
      t.y_label = "lag [mm]";
      a.plot_svg = plot::emit_plot(t, plot::PlotKind::Posterior);
    }
  } else if (e == "fig9") {
    const BayesOptOutcome o = lag_bayes_opt(machine, s, seed);
    a.result["best_ratio"] = o.run.best_x ? Json(*o.run.best_x) : Json(nullptr);
    a.result["best_lag"] = o.run.best_y ? Json(*o.run.best_y) : Json(nullptr);
    a.result["true_minimizer"] = o.true_minimizer;
    a.result["true_minimum"] = o.true_minimum;
    Json regret = Json::array();
    for (const auto& r : o.run.iterations)
      if (r.y && r.min_regret) regret.push_back(*r.min_regret);
    a.result["regret_trace"] = regret;
    a.result["successful"] = o.run.successful;
    a.result["run"] = io::to_json(o.run);
    a.trace_csv = io::run_csv(o.run);
    a.run_jsonl = io::run_jsonl(o.run);
    if (with_plot && !o.run.aborted) {
      const auto grid = stable_only(ratio_grid(s));
      const auto m = final_model(o.run, {s.ratio_grid.lo, s.ratio_grid.hi}, ratio_model(s), seed);
      plot::PlotTrace t = surrogate_trace(m, grid, o.run, s.log_ratio_input);
      t.title = "fig9: Bayesian optimization of lag distance";
      t.x_label = "Uc/Vjm";
      t.y_label = "lag [mm]";
      a.plot_svg = plot::emit_plot(t, plot::PlotKind::Posterior);
    }
  } else {  // metrology-bench
    const BenchOutcome b = metrology_bench(machine, s, seed);
    Json modes = Json::array();
    for (const auto& r : b.modes) modes.push_back(mode_json(r));
    a.result["modes"] = modes;
    a.result["stride"] = s.metrology.stride;
    a.result["max_diameter_error_mm"] = b.max_diameter_error_mm;
    a.result["max_lag_error_mm"] = b.max_lag_error_mm;
    a.result["cf"] = s.metrology.geometry.cf;
    a.result["worker_invariant"] = b.worker_invariant;
    a.result["hd_1080p"] = b.hd ? mode_json(*b.hd) : Json(nullptr);
    a.trace_csv = metrology::frames_csv(b.features);
    if (with_plot && !b.features.empty()) {
      plot::PlotTrace t;
      for (std::size_t i = 0; i < b.features.size(); ++i)
        if (b.features[i].lag_mm) {
          t.x.push_back(static_cast<double>(i));
          t.mean.push_back(*b.features[i].lag_mm);
        }
      t.title = "metrology-bench: measured lag per frame";
      t.x_label = "frame";
      t.y_label = "lag [mm]";
      a.plot_svg = plot::emit_plot(t, plot::PlotKind::Convergence);
    }
  }
  return a;
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& a) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto put = [&](const char* name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + (dir / name).string());
    out << body;
  };
  put("result.json", a.result.dump(2) + '\n');
  put("trace.csv", a.trace_csv);
  if (!a.run_jsonl.empty()) put("iterations.jsonl", a.run_jsonl);
  if (a.plot_svg) put("plot.svg", *a.plot_svg);
}

}  // namespace gpjet::exp
