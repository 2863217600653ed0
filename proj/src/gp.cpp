#include "gpjet/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gpjet/errors.hpp"

namespace gpjet::gp {

bool KernelHyper::valid() const noexcept {
  return lengthscale > 0.0 && signal_variance > 0.0 && noise_variance >= 0.0 && std::isfinite(lengthscale) &&
         std::isfinite(signal_variance) && std::isfinite(noise_variance);
}

double rbf(double x, double xp, const KernelHyper& h) {
  const double d = x - xp;
  return h.signal_variance * std::exp(-d * d / (2.0 * h.lengthscale * h.lengthscale));
}

Eigen::MatrixXd kernel_matrix(std::span<const double> x, const KernelHyper& h) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = h.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = rbf(x[i], x[j], h);
  }
  return k;
}

Factorization factorize(std::span<const double> x, const KernelHyper& h) {
  require(h.valid(), "invalid kernel hyperparameters");
  const Eigen::MatrixXd k = kernel_matrix(x, h);
  for (double rung = kJitterStart; rung <= kJitterMax * 1.0000001; rung *= 10.0) {
    const double jitter = rung * h.signal_variance;
    Eigen::MatrixXd a = k;
    a.diagonal().array() += h.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if (l.diagonal().minCoeff() > 0.0 && l.allFinite()) return {std::move(l), jitter};
    }
  }
  fail(ErrorCode::NotPositiveDefinite, "kernel matrix not positive definite after maximum jitter");
}

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 log(2 pi)

}  // namespace

double log_marginal_likelihood(std::span<const double> x, std::span<const double> y, const KernelHyper& h) {
  require(x.size() == y.size() && !x.empty(), "inputs and outputs must be non-empty and equally long");
  const Factorization f = factorize(x, h);
  const auto l = f.chol.triangularView<Eigen::Lower>();
  const Eigen::VectorXd alpha = l.transpose().solve(l.solve(as_vector(y)));
  const double fit_term = -0.5 * as_vector(y).dot(alpha);
  const double det_term = -f.chol.diagonal().array().log().sum();
  return fit_term + det_term - static_cast<double>(x.size()) * kHalfLog2Pi;
}

std::array<double, 3> log_marginal_likelihood_gradient(std::span<const double> x, std::span<const double> y,
                                                        const KernelHyper& h) {
  require(x.size() == y.size() && !x.empty(), "inputs and outputs must be non-empty and equally long");
  const Factorization f = factorize(x, h);
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto l = f.chol.triangularView<Eigen::Lower>();
  const Eigen::VectorXd alpha = l.transpose().solve(l.solve(as_vector(y)));
  Eigen::MatrixXd kinv = l.solve(Eigen::MatrixXd::Identity(n, n));
  kinv = l.transpose().solve(kinv);
  const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;

  const double inv_l2 = 1.0 / (h.lengthscale * h.lengthscale);
  double g_len = 0.0, g_sig = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x[i] - x[j];
      const double kf = h.signal_variance * std::exp(-0.5 * d * d * inv_l2);
      g_len += w(i, j) * kf * d * d * inv_l2;
      g_sig += w(i, j) * 2.0 * kf;
    }
  }
  const double g_noise = w.trace() * 2.0 * h.noise_variance;
  return {0.5 * g_len, 0.5 * g_sig, 0.5 * g_noise};
}

KernelHyper GPModel::raw_hyper() const noexcept {
  const double width = domain_.hi - domain_.lo;
  return {hyper_.lengthscale * width, hyper_.signal_variance * y_scale_ * y_scale_,
          hyper_.noise_variance * y_scale_ * y_scale_};
}

Prediction GPModel::predict(double x) const {
  const double u = normalize(x);
  const auto n = static_cast<Eigen::Index>(xn_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = rbf(u, xn_[i], hyper_);
  const double mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  double var = hyper_.signal_variance - v.squaredNorm();
  var = std::max(var, 0.0);
  return {y_mean_ + y_scale_ * mean, y_scale_ * y_scale_ * var};
}

std::vector<Prediction> GPModel::predict(std::span<const double> xs) const {
  std::vector<Prediction> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(predict(x));
  return out;
}

Prediction predict(const GPModel& model, double x) { return model.predict(x); }

namespace {

Interval resolve_domain(std::span<const double> x, std::optional<Interval> domain) {
  if (domain) {
    require(domain->hi > domain->lo, "domain must have positive width");
    return *domain;
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi > *lo) return {*lo, *hi};
  return {*lo - 0.5, *lo + 0.5};
}

void check_data(std::span<const double> x, std::span<const double> y) {
  require(!x.empty() && x.size() == y.size(), "inputs and outputs must be non-empty and equally long");
  for (std::size_t i = 0; i < x.size(); ++i)
    require(std::isfinite(x[i]) && std::isfinite(y[i]), "non-finite training data");
}

std::pair<double, double> mean_and_std(std::span<const double> y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(y.size()))};
}

}  // namespace

GPModel condition(std::span<const double> x, std::span<const double> y, const KernelHyper& hyper,
                  std::optional<Interval> domain, double y_scale_floor) {
  check_data(x, y);
  GPModel m;
  m.x_.assign(x.begin(), x.end());
  m.y_.assign(y.begin(), y.end());
  m.domain_ = resolve_domain(x, domain);
  m.hyper_ = hyper;
  const auto [mean, sd] = mean_and_std(y);
  m.y_mean_ = mean;
  m.y_scale_ = std::max(sd, y_scale_floor);
  if (!(m.y_scale_ > 0.0)) m.y_scale_ = 1.0;

  m.xn_.resize(x.size());
  std::vector<double> ys(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.xn_[i] = m.normalize(x[i]);
    ys[i] = (y[i] - m.y_mean_) / m.y_scale_;
  }
  const Factorization f = factorize(m.xn_, hyper);
  m.chol_ = f.chol;
  m.jitter_ = f.jitter;
  const Eigen::MatrixXd& chol = m.chol_;
  const auto l = chol.triangularView<Eigen::Lower>();
  m.alpha_ = l.transpose().solve(l.solve(as_vector(ys)));
  m.lml_ = -0.5 * as_vector(ys).dot(m.alpha_) - m.chol_.diagonal().array().log().sum() -
           static_cast<double>(x.size()) * kHalfLog2Pi;
  return m;
}

GPModel make_degenerate(std::span<const double> x, std::span<const double> y, std::optional<Interval> domain) {
  KernelHyper h;
  h.signal_variance = kSignalVarianceFloor;
  h.noise_variance = 0.0;
  GPModel m = condition(x, y, h, domain, 0.0);
  // Standardization is meaningless for constant data; keep raw units.
  m.y_scale_ = 1.0;
  m.alpha_.setZero();
  m.degenerate_ = true;
  return m;
}

namespace {

KernelHyper to_hyper(const std::array<double, 3>& p) {
  return {std::exp(p[0]), std::exp(2.0 * p[1]), std::exp(2.0 * p[2])};
}

std::array<double, 3> from_hyper(const KernelHyper& h) {
  return {std::log(h.lengthscale), 0.5 * std::log(h.signal_variance),
          0.5 * std::log(std::max(h.noise_variance, 1e-300))};
}

struct Box {
  std::array<double, 3> lo, hi;
};

Box log_box(const HyperBounds& b) {
  return {{std::log(b.lengthscale.lo), 0.5 * std::log(b.signal_variance.lo), 0.5 * std::log(b.noise_variance.lo)},
          {std::log(b.lengthscale.hi), 0.5 * std::log(b.signal_variance.hi), 0.5 * std::log(b.noise_variance.hi)}};
}

std::array<double, 3> clamp_to(const std::array<double, 3>& p, const Box& box) {
  return {std::clamp(p[0], box.lo[0], box.hi[0]), std::clamp(p[1], box.lo[1], box.hi[1]),
          std::clamp(p[2], box.lo[2], box.hi[2])};
}

// Objective is the negative log marginal likelihood; failures are +inf.
double objective(std::span<const double> x, std::span<const double> y, const std::array<double, 3>& p) {
  try {
    const double v = -log_marginal_likelihood(x, y, to_hyper(p));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::array<double, 3> objective_gradient(std::span<const double> x, std::span<const double> y,
                                         const std::array<double, 3>& p) {
  const auto g = log_marginal_likelihood_gradient(x, y, to_hyper(p));
  return {-g[0], -g[1], -g[2]};
}

// Projected BFGS with Armijo backtracking inside a box.
std::pair<std::array<double, 3>, double> minimize(std::span<const double> x, std::span<const double> y,
                                                  std::array<double, 3> p, const Box& box, int max_iter) {
  p = clamp_to(p, box);
  double f = objective(x, y, p);
  if (!std::isfinite(f)) return {p, f};
  Eigen::Matrix3d hinv = Eigen::Matrix3d::Identity();
  std::array<double, 3> g = objective_gradient(x, y, p);

  for (int it = 0; it < max_iter; ++it) {
    Eigen::Vector3d gv(g[0], g[1], g[2]);
    // Coordinates pinned at a bound with the gradient pushing outward are frozen.
    Eigen::Vector3d free = Eigen::Vector3d::Ones();
    for (int i = 0; i < 3; ++i) {
      if ((p[i] <= box.lo[i] && gv(i) > 0.0) || (p[i] >= box.hi[i] && gv(i) < 0.0)) free(i) = 0.0;
    }
    const Eigen::Vector3d gfree = gv.cwiseProduct(free);
    if (gfree.norm() < 1e-7) break;
    Eigen::Vector3d dir = -(hinv * gfree).cwiseProduct(free);
    if (dir.dot(gfree) >= 0.0) {
      hinv.setIdentity();
      dir = -gfree;
    }
    double step = 1.0;
    const double max_move = dir.cwiseAbs().maxCoeff();
    if (max_move > 2.0) step = 2.0 / max_move;

    std::array<double, 3> trial{};
    double f_trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (int i = 0; i < 3; ++i) trial[i] = p[i] + step * dir(i);
      trial = clamp_to(trial, box);
      f_trial = objective(x, y, trial);
      Eigen::Vector3d moved(trial[0] - p[0], trial[1] - p[1], trial[2] - p[2]);
      if (f_trial <= f + 1e-4 * gfree.dot(moved)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const std::array<double, 3> g_new = objective_gradient(x, y, trial);
    const Eigen::Vector3d s(trial[0] - p[0], trial[1] - p[1], trial[2] - p[2]);
    const Eigen::Vector3d yk(g_new[0] - g[0], g_new[1] - g[1], g_new[2] - g[2]);
    const double sy = s.dot(yk);
    const double improvement = f - f_trial;
    p = trial;
    f = f_trial;
    g = g_new;
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d ident = Eigen::Matrix3d::Identity();
      hinv = (ident - rho * s * yk.transpose()) * hinv * (ident - rho * yk * s.transpose()) + rho * s * s.transpose();
    }
    if (s.norm() < 1e-10 || improvement < 1e-12 * (1.0 + std::abs(f))) break;
  }
  return {p, f};
}

}  // namespace

GPModel fit(std::span<const double> x, std::span<const double> y, const FitOptions& opt) {
  check_data(x, y);
  require(x.size() >= 2, "GP training needs at least two observations");
  require(opt.restarts >= 1, "at least one optimization start is required");

  const auto [mean, sd] = mean_and_std(y);
  if (!(sd > opt.degenerate_tolerance)) return make_degenerate(x, y, opt.domain);

  const Interval domain = resolve_domain(x, opt.domain);
  std::vector<double> xn(x.size()), ys(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xn[i] = (x[i] - domain.lo) / (domain.hi - domain.lo);
    ys[i] = (y[i] - mean) / sd;
  }

  Box box = log_box(opt.bounds);
  if (opt.resolution_floor)
    box.lo[0] = std::min(box.hi[0], std::max(box.lo[0], std::log(0.5 / static_cast<double>(x.size() - 1))));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto log_uniform = [&](double lo, double hi) { return std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)); };

  std::array<double, 3> best = clamp_to(from_hyper(opt.init), box);
  double best_f = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    std::array<double, 3> start;
    if (r == 0) {
      start = from_hyper(opt.init);
    } else {
      start = {log_uniform(0.03, 1.5), 0.5 * log_uniform(0.1, 10.0), 0.5 * log_uniform(1e-6, 1e-1)};
    }
    const auto [p, f] = minimize(xn, ys, start, box, opt.max_iterations);
    if (f < best_f) {
      best_f = f;
      best = p;
    }
  }
  if (!std::isfinite(best_f)) fail(ErrorCode::NotPositiveDefinite, "no hyperparameter start produced a valid model");
  return condition(x, y, to_hyper(best), domain);
}

}  // namespace gpjet::gp
