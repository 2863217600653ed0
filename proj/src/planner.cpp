#include "gpjet/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "gpjet/errors.hpp"

namespace gpjet::planner {

std::string_view to_string(AcquisitionKind kind) noexcept {
  switch (kind) {
    case AcquisitionKind::Variance: return "Variance";
    case AcquisitionKind::ProbabilityOfImprovement: return "ProbabilityOfImprovement";
    case AcquisitionKind::ExpectedImprovement: return "ExpectedImprovement";
    case AcquisitionKind::LowerConfidenceBound: return "LowerConfidenceBound";
  }
  return "Unknown";
}

AcquisitionKind acquisition_from_string(std::string_view name) {
  if (name == "Variance" || name == "variance") return AcquisitionKind::Variance;
  if (name == "ProbabilityOfImprovement" || name == "PI" || name == "pi") return AcquisitionKind::ProbabilityOfImprovement;
  if (name == "ExpectedImprovement" || name == "EI" || name == "ei") return AcquisitionKind::ExpectedImprovement;
  if (name == "LowerConfidenceBound" || name == "LCB" || name == "lcb") return AcquisitionKind::LowerConfidenceBound;
  fail(ErrorCode::ConfigError, "unknown acquisition function '" + std::string(name) + "'");
}

double normal_pdf(double z) noexcept { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double acquire(const AcquisitionSpec& spec, double mu, double sigma, double f_best) {
  require(sigma >= 0.0, "posterior standard deviation must be non-negative");
  switch (spec.kind) {
    case AcquisitionKind::Variance:
      return sigma * sigma;
    case AcquisitionKind::ProbabilityOfImprovement: {
      const double gain = mu - f_best - spec.xi;
      if (sigma == 0.0) return 0.0;
      return normal_cdf(gain / sigma);
    }
    case AcquisitionKind::ExpectedImprovement: {
      if (sigma == 0.0) return 0.0;
      const double gain = mu - f_best - spec.xi;
      const double z = gain / sigma;
      return gain * normal_cdf(z) + sigma * normal_pdf(z);
    }
    case AcquisitionKind::LowerConfidenceBound:
      return -(mu - spec.kappa * sigma);
  }
  return 0.0;
}

gp::Prediction Surrogate::predict(double x) const {
  return std::visit(
      [x](const auto& m) -> gp::Prediction {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, gp::GPModel>)
          return m.predict(x);
        else
          return mf::predict_mf(m, x);
      },
      model_);
}

namespace {

double apply(const std::function<double(double)>& transform, double x) { return transform ? transform(x) : x; }

bool already_observed(double x, std::span<const double> observed) {
  return std::any_of(observed.begin(), observed.end(), [x](double o) { return std::abs(o - x) <= 1e-9; });
}

}  // namespace

Proposal propose_next(const PredictFn& predict, std::span<const double> candidates, const AcquisitionSpec& spec,
                      std::span<const double> observed, double f_best, Sense sense) {
  require(!candidates.empty(), "candidate grid is empty");
  std::optional<Proposal> best;
  for (double x : candidates) {
    if (already_observed(x, observed)) continue;
    const gp::Prediction p = predict(x);
    const double sigma = std::sqrt(std::max(p.variance, 0.0));
    double value = 0.0;
    if (sense == Sense::Minimize && (spec.kind == AcquisitionKind::ProbabilityOfImprovement ||
                                     spec.kind == AcquisitionKind::ExpectedImprovement)) {
      value = acquire(spec, -p.mean, sigma, -f_best);
    } else {
      value = acquire(spec, p.mean, sigma, f_best);
    }
    if (!best || value > best->value || (value == best->value && x < best->x)) best = Proposal{x, value};
  }
  if (!best) fail(ErrorCode::GridExhausted, "every candidate has already been observed");
  return *best;
}

Proposal propose_next(const Surrogate& model, std::span<const double> candidates, const AcquisitionSpec& spec,
                      std::span<const double> observed, double f_best, Sense sense,
                      const std::function<double(double)>& transform) {
  return propose_next([&](double x) { return model.predict(apply(transform, x)); }, candidates, spec, observed,
                      f_best, sense);
}

Metrics metrics(std::span<const gp::Prediction> predictions, std::span<const double> truth,
                std::optional<double> best_so_far, std::optional<double> true_opt) {
  require(!predictions.empty(), "evaluation grid is empty");
  require(predictions.size() == truth.size(), "prediction/truth length mismatch");
  double se = 0.0, width = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i].mean - truth[i];
    se += d * d;
    width += 2.0 * kCiHalfWidthZ * std::sqrt(std::max(predictions[i].variance, 0.0));
  }
  const auto n = static_cast<double>(predictions.size());
  Metrics m{std::sqrt(se / n), width / n, std::nullopt};
  if (best_so_far && true_opt) m.min_regret = *best_so_far - *true_opt;
  return m;
}

Metrics metrics(const Surrogate& model, std::span<const double> eval_grid, std::span<const double> truth,
                std::optional<double> best_so_far, std::optional<double> true_opt,
                const std::function<double(double)>& transform) {
  std::vector<gp::Prediction> preds;
  preds.reserve(eval_grid.size());
  for (double x : eval_grid) preds.push_back(model.predict(apply(transform, x)));
  return metrics(preds, truth, best_so_far, true_opt);
}

std::uint64_t query_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> draw_initial_points(std::span<const double> candidates, std::size_t count, std::uint64_t seed) {
  require(count <= candidates.size(), "more initial points requested than candidates");
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates keeps the draw independent of the library's shuffle.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(candidates[idx[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct InputMap {
  bool log = false;
  double operator()(double x) const { return log ? std::log(x) : x; }
  gp::Interval domain(const gp::Interval& d) const { return log ? gp::Interval{std::log(d.lo), std::log(d.hi)} : d; }
  std::function<double(double)> function() const {
    if (!log) return {};
    return [](double x) { return std::log(x); };
  }
};

double raw_lengthscale(const Surrogate& s) {
  if (const auto* g = s.single()) return g->raw_hyper().lengthscale;
  return s.multi()->err.raw_hyper().lengthscale;
}

std::optional<double> rho_of(const Surrogate& s) {
  if (const auto* m = s.multi()) return m->rho;
  return std::nullopt;
}

double y_spread(std::span<const double> ys) {
  if (ys.size() < 2) return 0.0;
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double ss = 0.0;
  for (double v : ys) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(ys.size()));
}

}  // namespace

Surrogate build_surrogate(std::span<const double> xs, std::span<const double> ys, const gp::Interval& domain,
                          const ModelOptions& opt, std::uint64_t seed, bool use_mf,
                          const std::function<double(double)>& low_fidelity, std::span<const double> low_design) {
  const InputMap map{opt.log_input};
  const gp::Interval model_domain = map.domain(domain);
  std::vector<double> u(xs.size());
  std::transform(xs.begin(), xs.end(), u.begin(), map);

  if (use_mf) {
    require(static_cast<bool>(low_fidelity), "multi-fidelity surrogate needs a low-fidelity source");
    // Low-fidelity design = configured stations plus every high-fidelity input.
    std::vector<double> x_low(low_design.begin(), low_design.end());
    for (double x : xs)
      if (!already_observed(x, x_low)) x_low.push_back(x);
    std::sort(x_low.begin(), x_low.end());
    std::vector<double> y_low(x_low.size()), u_low(x_low.size());
    for (std::size_t i = 0; i < x_low.size(); ++i) {
      y_low[i] = low_fidelity(x_low[i]);
      u_low[i] = map(x_low[i]);
    }
    mf::MFOptions mopt;
    mopt.fit.init = opt.prior;
    mopt.fit.restarts = opt.restarts;
    mopt.fit.seed = seed;
    mopt.fit.domain = model_domain;
    return Surrogate(mf::fit_mf(u_low, y_low, u, ys, mopt));
  }

  if (xs.size() < std::max<std::size_t>(opt.min_train_points, 2)) {
    // Too few points to estimate a scale: the observed magnitude sets the prior amplitude.
    double mean = 0.0;
    for (double y : ys) mean += y / static_cast<double>(ys.size());
    const double floor = std::max(1e-3, std::abs(mean));
    return Surrogate(gp::condition(u, ys, opt.prior, model_domain, floor));
  }
  gp::FitOptions fopt;
  fopt.init = opt.prior;
  fopt.restarts = opt.restarts;
  fopt.seed = seed;
  fopt.domain = model_domain;
  return Surrogate(gp::fit(u, ys, fopt));
}

RunRecord run_active_learning(const ActiveLearningSetup& s) {
  require(static_cast<bool>(s.oracle), "active learning needs an oracle");
  require(!s.candidates.empty(), "active learning needs candidates");
  require(s.max_iter >= 1, "max_iter must be at least 1");
  require(!s.use_mf || static_cast<bool>(s.low_fidelity), "multi-fidelity run needs a low-fidelity source");
  require(s.eval_grid.size() == s.truth.size() && !s.eval_grid.empty(), "evaluation grid and truth must match");

  const InputMap map{s.model.log_input};
  const auto transform = map.function();

  double floor = s.mciw_floor;
  if (floor <= 0.0) {
    const auto [lo, hi] = std::minmax_element(s.truth.begin(), s.truth.end());
    floor = 0.01 * (*hi - *lo);
  }

  std::vector<double> init =
      s.init_points.empty() ? draw_initial_points(s.candidates, s.init_count, query_seed(s.seed, 1u << 20)) : s.init_points;
  require(!init.empty(), "active learning needs at least one initial point");

  RunRecord rec;
  std::vector<double> xs, ys;
  std::uint64_t queries = 0;
  try {
    for (double x : init) {
      const double y = s.oracle(x, query_seed(s.seed, queries++));
      xs.push_back(x);
      ys.push_back(y);
      ++rec.successful;
    }
    Surrogate model = build_surrogate(xs, ys, s.domain, s.model, query_seed(s.seed, 7777), s.use_mf, s.low_fidelity,
                                      s.low_design);
    Metrics m = metrics(model, s.eval_grid, s.truth, std::nullopt, std::nullopt, transform);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      IterationRecord r;
      r.iter = 0;
      r.x = xs[i];
      r.y = ys[i];
      r.rmse = m.rmse;
      r.mciw = m.mciw;
      r.lengthscale = raw_lengthscale(model);
      r.rho = rho_of(model);
      rec.iterations.push_back(r);
    }

    for (int it = 1; it <= s.max_iter; ++it) {
      if (m.mciw < floor) break;
      const Proposal p = propose_next(model, s.candidates, s.spec, xs, 0.0, Sense::Maximize, transform);
      const double y = s.oracle(p.x, query_seed(s.seed, queries++));
      xs.push_back(p.x);
      ys.push_back(y);
      ++rec.successful;
      model = build_surrogate(xs, ys, s.domain, s.model, query_seed(s.seed, 7777 + it), s.use_mf, s.low_fidelity,
                              s.low_design);
      m = metrics(model, s.eval_grid, s.truth, std::nullopt, std::nullopt, transform);
      IterationRecord r;
      r.iter = it;
      r.x = p.x;
      r.y = y;
      r.rmse = m.rmse;
      r.mciw = m.mciw;
      r.lengthscale = raw_lengthscale(model);
      r.rho = rho_of(model);
      rec.iterations.push_back(r);
    }
  } catch (const Error& e) {
    rec.aborted = true;
    rec.error = e.what();
  }
  return rec;
}

RunRecord run_bayesian_optimization(const BayesOptSetup& s) {
  require(static_cast<bool>(s.oracle), "Bayesian optimization needs an oracle");
  require(!s.candidates.empty(), "Bayesian optimization needs candidates");
  require(!s.init_points.empty(), "Bayesian optimization needs an initial point");
  require(s.spec.kind == AcquisitionKind::ExpectedImprovement || s.spec.kind == AcquisitionKind::LowerConfidenceBound ||
              s.spec.kind == AcquisitionKind::ProbabilityOfImprovement,
          "Bayesian optimization needs an improvement-style acquisition");
  require(s.eval_grid.size() == s.truth.size(), "evaluation grid and truth must match");

  const InputMap map{s.model.log_input};
  const auto transform = map.function();

  RunRecord rec;
  std::vector<double> xs, ys;      // successful observations
  std::vector<double> tried;       // every queried input
  std::vector<double> pen_x;       // failed inputs
  std::optional<double> best_regret;
  std::uint64_t queries = 0;
  int it = 0;

  const auto regret_of = [&](double x, double y) {
    const double value = s.truth_fn ? s.truth_fn(x) : y;
    return std::max(0.0, value - s.true_optimum);
  };

  // Failed inputs never enter the GP. They override the posterior inside
  // the acquisition: a penalty mean with zero spread.
  const auto penalized = [&](double x) {
    if (pen_x.empty()) return false;
    if (s.penalize_below_failure) return x <= *std::max_element(pen_x.begin(), pen_x.end()) + 1e-12;
    return already_observed(x, pen_x);
  };
  const auto penalty_value = [&]() {
    const double top = ys.empty() ? 1.0 : *std::max_element(ys.begin(), ys.end());
    return s.penalty_factor * top;
  };

  const auto record = [&](double x, std::optional<double> y, const std::optional<Surrogate>& model) {
    IterationRecord r;
    r.iter = it;
    r.x = x;
    r.y = y;
    r.failed = !y.has_value();
    if (y) {
      const double reg = regret_of(x, *y);
      best_regret = best_regret ? std::min(*best_regret, reg) : reg;
    }
    r.min_regret = best_regret;
    if (model && !s.eval_grid.empty()) {
      const Metrics m = metrics(*model, s.eval_grid, s.truth, std::nullopt, std::nullopt, transform);
      r.rmse = m.rmse;
      r.mciw = m.mciw;
      r.lengthscale = raw_lengthscale(*model);
    }
    rec.iterations.push_back(r);
  };

  const auto observe = [&](double x) -> std::optional<double> {
    tried.push_back(x);
    try {
      const double y = s.oracle(x, query_seed(s.seed, queries++));
      xs.push_back(x);
      ys.push_back(y);
      ++rec.successful;
      if (!rec.best_y || y < *rec.best_y) {
        rec.best_y = y;
        rec.best_x = x;
      }
      return y;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnstableRegime) throw;
      pen_x.push_back(x);
      rec.penalty_x.push_back(x);
      ++rec.failures;
      return std::nullopt;
    }
  };

  const auto fit_model = [&](int salt) -> std::optional<Surrogate> {
    if (xs.empty()) return std::nullopt;
    return build_surrogate(xs, ys, s.domain, s.model, query_seed(s.seed, 9000 + static_cast<std::uint64_t>(salt)));
  };

  try {
    for (double x : s.init_points) {
      if (rec.successful >= s.max_successful || static_cast<int>(tried.size()) >= s.max_total) break;
      const auto y = observe(x);
      record(x, y, fit_model(0));
    }
    while (rec.successful < s.max_successful && static_cast<int>(tried.size()) < s.max_total) {
      ++it;
      const auto model = fit_model(it);
      const double f_best = rec.best_y ? *rec.best_y : 0.0;
      AcquisitionSpec spec = s.spec;
      if (spec.kind != AcquisitionKind::LowerConfidenceBound && spec.xi <= 0.0)
        spec.xi = s.xi_fraction * y_spread(ys);
      const double pen = penalty_value();
      const PredictFn predict = [&](double x) -> gp::Prediction {
        if (penalized(x)) return {pen, 0.0};
        if (!model) return {0.0, 1.0};
        return model->predict(apply(transform, x));
      };
      const Proposal p = propose_next(predict, s.candidates, spec, tried, f_best, Sense::Minimize);
      const auto y = observe(p.x);
      record(p.x, y, fit_model(it));
    }
  } catch (const Error& e) {
    rec.aborted = true;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace gpjet::planner
