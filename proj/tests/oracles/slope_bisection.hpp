#pragma once

// Inlet slope condition coded directly from the boundary relation, solved by
// plain bisection on the sign change closest to zero from below.

#include <cmath>
#include <optional>

namespace oracle {

inline double inlet_residual(double p, double Ca, double Fe, double beta_E) {
  const double s = std::sqrt(1.0 + p * p);
  return 6.0 * p * p + (1.0 / Ca + Fe) * p + 2.0 * Fe / s * (1.0 - beta_E / s);
}

inline std::optional<double> inlet_slope(double Ca, double Fe, double beta_E) {
  const int n = 200000;
  double hi = 0.0, fhi = inlet_residual(0.0, Ca, Fe, beta_E);
  if (fhi == 0.0) return 0.0;
  for (int i = 1; i <= n; ++i) {
    const double lo = -50.0 * i / n;
    const double flo = inlet_residual(lo, Ca, Fe, beta_E);
    if ((flo < 0.0) != (fhi < 0.0) || flo == 0.0) {
      double a = lo, b = hi, fa = flo;
      for (int k = 0; k < 200 && b - a > 1e-15; ++k) {
        const double mid = 0.5 * (a + b);
        const double fm = inlet_residual(mid, Ca, Fe, beta_E);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    hi = lo;
    fhi = flo;
  }
  return std::nullopt;
}

}  // namespace oracle
