#pragma once

// Two-level recursive multi-fidelity regression: the high-fidelity response
// is rho times the low-fidelity posterior plus an independent error GP.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gpjet/gp.hpp"

namespace gpjet::mf {

struct MFOptions {
  gp::FitOptions fit{};
  /// Nested-design matching tolerance, in normalized input units.
  double nested_tolerance = 1e-9;
  /// Residual spread (relative to the spread of y_high) treated as zero.
  double residual_degenerate_fraction = 1e-4;
};

struct MFModel {
  gp::GPModel low;
  gp::GPModel err;
  double rho = 1.0;
  std::vector<double> x_low, x_high;

  std::size_t n_low() const noexcept { return x_low.size(); }
  std::size_t n_high() const noexcept { return x_high.size(); }
};

/// Throws NestedDesignViolation unless every x_high matches some x_low.
void check_nested(std::span<const double> x_low, std::span<const double> x_high, gp::Interval domain,
                  double tolerance);

/// Least-squares scaling of y_high on the low-fidelity posterior mean.
double estimate_rho(std::span<const double> y_high, std::span<const double> low_mean);

MFModel fit_mf(std::span<const double> x_low, std::span<const double> y_low, std::span<const double> x_high,
               std::span<const double> y_high, const MFOptions& options = {});

gp::Prediction predict_mf(const MFModel& model, double x);

}  // namespace gpjet::mf
