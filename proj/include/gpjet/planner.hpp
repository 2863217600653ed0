#pragma once

// Acquisition functions and the sequential active-learning and Bayesian
// optimization loops driven by an observation oracle.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gpjet/gp.hpp"
#include "gpjet/multi_fidelity.hpp"

namespace gpjet::planner {

enum class AcquisitionKind { Variance, ProbabilityOfImprovement, ExpectedImprovement, LowerConfidenceBound };

std::string_view to_string(AcquisitionKind kind) noexcept;
AcquisitionKind acquisition_from_string(std::string_view name);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::Variance;
  double xi = 0.0;     // improvement margin for PI/EI
  double kappa = 2.0;  // LCB exploration weight
};

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

/// Acquisition value in argmax form. PI and EI follow the maximization
/// convention (improvement = mu - f_best - xi); LCB is returned negated.
double acquire(const AcquisitionSpec& spec, double mu, double sigma, double f_best);

/// Either surrogate kind behind one predict().
class Surrogate {
 public:
  Surrogate(gp::GPModel model) : model_(std::move(model)) {}
  Surrogate(mf::MFModel model) : model_(std::move(model)) {}

  gp::Prediction predict(double x) const;
  bool is_multi_fidelity() const noexcept { return std::holds_alternative<mf::MFModel>(model_); }
  const gp::GPModel* single() const noexcept { return std::get_if<gp::GPModel>(&model_); }
  const mf::MFModel* multi() const noexcept { return std::get_if<mf::MFModel>(&model_); }

 private:
  std::variant<gp::GPModel, mf::MFModel> model_;
};

/// Objective direction used when scoring PI/EI.
enum class Sense { Maximize, Minimize };

struct Proposal {
  double x = 0.0;
  double value = 0.0;
};

/// Posterior at a raw candidate input.
using PredictFn = std::function<gp::Prediction(double)>;

Proposal propose_next(const PredictFn& predict, std::span<const double> candidates, const AcquisitionSpec& spec,
                      std::span<const double> observed, double f_best, Sense sense = Sense::Maximize);

/// Grid argmax of the acquisition over candidates not yet observed (within
/// 1e-9); ties go to the smallest x. Throws GridExhausted when none remain.
/// `transform` maps a candidate onto the surrogate's input coordinate.
Proposal propose_next(const Surrogate& model, std::span<const double> candidates, const AcquisitionSpec& spec,
                      std::span<const double> observed, double f_best, Sense sense = Sense::Maximize,
                      const std::function<double(double)>& transform = {});

struct Metrics {
  double rmse = 0.0;
  double mciw = 0.0;
  std::optional<double> min_regret;
};

inline constexpr double kCiHalfWidthZ = 1.96;

Metrics metrics(std::span<const gp::Prediction> predictions, std::span<const double> truth,
                std::optional<double> best_so_far = std::nullopt, std::optional<double> true_opt = std::nullopt);

Metrics metrics(const Surrogate& model, std::span<const double> eval_grid, std::span<const double> truth,
                std::optional<double> best_so_far = std::nullopt, std::optional<double> true_opt = std::nullopt,
                const std::function<double(double)>& transform = {});

/// Observation source. Throws Error(UnstableRegime) when no observation can
/// be produced at x.
using Oracle = std::function<double(double x, std::uint64_t seed)>;

struct IterationRecord {
  int iter = 0;
  double x = 0.0;
  std::optional<double> y;
  bool failed = false;
  double rmse = 0.0;
  double mciw = 0.0;
  std::optional<double> min_regret;
  double lengthscale = 0.0;  // raw units, single-fidelity or error GP
  std::optional<double> rho;
};

struct RunRecord {
  std::vector<IterationRecord> iterations;
  bool aborted = false;
  std::string error;
  std::optional<double> best_x;
  std::optional<double> best_y;
  int successful = 0;
  int failures = 0;
  std::vector<double> penalty_x;  // failed inputs, penalized in the acquisition
};

struct ModelOptions {
  int restarts = 8;
  /// Below this many observations hyperparameters stay at `prior`.
  std::size_t min_train_points = 3;
  gp::KernelHyper prior{0.2, 1.0, 1e-4};
  /// Fits and predictions use log(x) instead of x.
  bool log_input = false;
};

struct ActiveLearningSetup {
  Oracle oracle;
  gp::Interval domain;
  std::vector<double> candidates;
  AcquisitionSpec spec;
  std::vector<double> init_points;
  std::size_t init_count = 0;  // drawn from candidates when init_points is empty
  int max_iter = 6;
  double mciw_floor = 0.0;  // absolute; <= 0 means 1% of the truth range
  bool use_mf = false;
  std::function<double(double)> low_fidelity;
  std::vector<double> low_design;
  std::vector<double> eval_grid;
  std::vector<double> truth;
  ModelOptions model;
  std::uint64_t seed = 0;
};

struct BayesOptSetup {
  Oracle oracle;
  gp::Interval domain;
  std::vector<double> candidates;
  AcquisitionSpec spec{AcquisitionKind::ExpectedImprovement, 0.0, 2.0};
  std::vector<double> init_points;
  int max_successful = 3;
  int max_total = 40;
  /// Failed inputs score as penalty_factor * (largest observed y) with zero
  /// spread; with penalize_below_failure every candidate at or below the
  /// largest failed input is treated the same way.
  double penalty_factor = 2.0;
  bool penalize_below_failure = true;
  double true_optimum = 0.0;
  /// Noise-free objective used for regret; falls back to observed values.
  std::function<double(double)> truth_fn;
  std::vector<double> eval_grid;
  std::vector<double> truth;
  ModelOptions model;
  /// Relative EI margin: xi = xi_fraction * std(observed y).
  double xi_fraction = 0.01;
  std::uint64_t seed = 0;
};

/// Draws `count` distinct candidates deterministically from `seed`.
std::vector<double> draw_initial_points(std::span<const double> candidates, std::size_t count, std::uint64_t seed);

/// Builds a single- or multi-fidelity surrogate over the given observations.
Surrogate build_surrogate(std::span<const double> xs, std::span<const double> ys, const gp::Interval& domain,
                          const ModelOptions& options, std::uint64_t seed, bool use_mf = false,
                          const std::function<double(double)>& low_fidelity = {},
                          std::span<const double> low_design = {});

RunRecord run_active_learning(const ActiveLearningSetup& setup);

RunRecord run_bayesian_optimization(const BayesOptSetup& setup);

/// Mixes a run seed with an iteration index into an independent query seed.
std::uint64_t query_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace gpjet::planner
