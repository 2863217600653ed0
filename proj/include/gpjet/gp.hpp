#pragma once

// Single-output Gaussian process regression with a squared-exponential
// kernel over a scalar input.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gpjet::gp {

struct KernelHyper {
  double lengthscale = 0.2;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;

  bool valid() const noexcept;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;
inline constexpr double kSignalVarianceFloor = 1e-6;

/// sigma_f^2 exp(-(x - x')^2 / (2 l^2)).
double rbf(double x, double x_prime, const KernelHyper& hyper);

Eigen::MatrixXd kernel_matrix(std::span<const double> x, const KernelHyper& hyper);

/// Cholesky factor of K + (sigma_n^2 + jitter) I. The jitter starts at
/// 1e-10 sigma_f^2 and grows tenfold up to 1e-4 sigma_f^2 before giving up
/// with NotPositiveDefinite.
struct Factorization {
  Eigen::MatrixXd chol;
  double jitter = 0.0;
};
Factorization factorize(std::span<const double> x, const KernelHyper& hyper);

/// Log marginal likelihood of y under a zero-mean GP, evaluated in the
/// coordinates given (no normalization).
double log_marginal_likelihood(std::span<const double> x, std::span<const double> y, const KernelHyper& hyper);

/// Gradient with respect to (log l, log sigma_f, log sigma_n).
std::array<double, 3> log_marginal_likelihood_gradient(std::span<const double> x, std::span<const double> y,
                                                        const KernelHyper& hyper);

/// Trained (or conditioned) model. Inputs are mapped affinely from `domain`
/// onto [0, 1] and outputs standardized; `hyper` lives in those units.
class GPModel {
 public:
  GPModel() = default;

  Prediction predict(double x) const;
  std::vector<Prediction> predict(std::span<const double> xs) const;

  std::size_t size() const noexcept { return x_.size(); }
  const std::vector<double>& inputs() const noexcept { return x_; }
  const std::vector<double>& outputs() const noexcept { return y_; }
  const KernelHyper& hyper() const noexcept { return hyper_; }
  const Interval& domain() const noexcept { return domain_; }
  double y_mean() const noexcept { return y_mean_; }
  double y_scale() const noexcept { return y_scale_; }
  double log_marginal_likelihood() const noexcept { return lml_; }
  double jitter() const noexcept { return jitter_; }
  bool degenerate() const noexcept { return degenerate_; }
  const Eigen::MatrixXd& chol() const noexcept { return chol_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }

  /// Kernel hyperparameters expressed in raw input/output units.
  KernelHyper raw_hyper() const noexcept;

  double normalize(double x) const noexcept { return (x - domain_.lo) / (domain_.hi - domain_.lo); }

 private:
  friend GPModel condition(std::span<const double>, std::span<const double>, const KernelHyper&,
                           std::optional<Interval>, double);
  friend GPModel make_degenerate(std::span<const double>, std::span<const double>, std::optional<Interval>);

  std::vector<double> x_, y_, xn_;
  KernelHyper hyper_;
  Interval domain_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double lml_ = 0.0;
  double jitter_ = 0.0;
  bool degenerate_ = false;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

/// Builds the posterior for fixed hyperparameters (normalized units).
/// `y_scale_floor` keeps standardization finite for a single observation.
GPModel condition(std::span<const double> x, std::span<const double> y, const KernelHyper& hyper,
                  std::optional<Interval> domain = std::nullopt, double y_scale_floor = 0.0);

/// Prior-mean model at the constant value of y with sigma_f^2 at its floor.
GPModel make_degenerate(std::span<const double> x, std::span<const double> y,
                        std::optional<Interval> domain = std::nullopt);

struct HyperBounds {
  Interval lengthscale{1e-2, 10.0};
  Interval signal_variance{kSignalVarianceFloor, 1e4};
  Interval noise_variance{1e-10, 0.1};  // standardized units: noise may not dominate the signal
};

struct FitOptions {
  KernelHyper init{};
  int restarts = 8;
  std::uint64_t seed = 0;
  std::optional<Interval> domain;
  HyperBounds bounds{};
  /// Outputs whose spread is below this are treated as constant.
  double degenerate_tolerance = 1e-12;
  int max_iterations = 200;
  /// Raise the lengthscale floor to half the mean design spacing, 0.5 / (n - 1)
  /// in normalized units; shorter scales are unidentifiable and collapse to white noise.
  bool resolution_floor = true;
};

/// Multi-start maximization of the log marginal likelihood. Constant outputs
/// return the degenerate prior-mean model instead of throwing.
GPModel fit(std::span<const double> x, std::span<const double> y, const FitOptions& options = {});

Prediction predict(const GPModel& model, double x);

}  // namespace gpjet::gp
