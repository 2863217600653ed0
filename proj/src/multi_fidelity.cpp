#include "gpjet/multi_fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpjet/errors.hpp"

namespace gpjet::mf {

void check_nested(std::span<const double> x_low, std::span<const double> x_high, gp::Interval domain,
                  double tolerance) {
  const double width = domain.hi - domain.lo;
  for (double xh : x_high) {
    const bool found = std::any_of(x_low.begin(), x_low.end(),
                                   [&](double xl) { return std::abs(xl - xh) / width <= tolerance; });
    if (!found) fail(ErrorCode::NestedDesignViolation, "high-fidelity input " + std::to_string(xh) +
                                                           " is not among the low-fidelity inputs");
  }
}

double estimate_rho(std::span<const double> y_high, std::span<const double> low_mean) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y_high.size(); ++i) {
    num += y_high[i] * low_mean[i];
    den += low_mean[i] * low_mean[i];
  }
  return den > 0.0 ? num / den : 1.0;
}

MFModel fit_mf(std::span<const double> x_low, std::span<const double> y_low, std::span<const double> x_high,
               std::span<const double> y_high, const MFOptions& opt) {
  require(x_low.size() == y_low.size() && x_high.size() == y_high.size(), "input/output length mismatch");
  require(x_high.size() >= 2, "multi-fidelity fit needs at least two high-fidelity observations");
  require(x_low.size() >= x_high.size(), "low-fidelity design must be at least as large as the high one");

  gp::Interval domain;
  if (opt.fit.domain) {
    domain = *opt.fit.domain;
  } else {
    const auto [lo, hi] = std::minmax_element(x_low.begin(), x_low.end());
    domain = {*lo, *hi > *lo ? *hi : *lo + 1.0};
  }
  check_nested(x_low, x_high, domain, opt.nested_tolerance);

  gp::FitOptions low_opt = opt.fit;
  low_opt.domain = domain;
  MFModel m;
  m.low = gp::fit(x_low, y_low, low_opt);
  m.x_low.assign(x_low.begin(), x_low.end());
  m.x_high.assign(x_high.begin(), x_high.end());

  std::vector<double> low_mean(x_high.size());
  for (std::size_t i = 0; i < x_high.size(); ++i) low_mean[i] = m.low.predict(x_high[i]).mean;
  m.rho = estimate_rho(y_high, low_mean);

  std::vector<double> residual(x_high.size());
  for (std::size_t i = 0; i < x_high.size(); ++i) residual[i] = y_high[i] - m.rho * low_mean[i];

  const double mean_high = std::accumulate(y_high.begin(), y_high.end(), 0.0) / static_cast<double>(y_high.size());
  double ss = 0.0;
  for (double v : y_high) ss += (v - mean_high) * (v - mean_high);
  const double spread = std::sqrt(ss / static_cast<double>(y_high.size()));

  gp::FitOptions err_opt = opt.fit;
  err_opt.domain = domain;
  err_opt.seed = opt.fit.seed + 0x9E3779B97F4A7C15ULL;
  err_opt.degenerate_tolerance = std::max(opt.fit.degenerate_tolerance,
                                          opt.residual_degenerate_fraction * (spread + 1e-300));
  m.err = gp::fit(x_high, residual, err_opt);
  return m;
}

gp::Prediction predict_mf(const MFModel& m, double x) {
  const gp::Prediction low = m.low.predict(x);
  const gp::Prediction err = m.err.predict(x);
  return {m.rho * low.mean + err.mean, std::max(0.0, m.rho * m.rho * low.variance + err.variance)};
}

}  // namespace gpjet::mf
