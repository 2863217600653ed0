#include "gpjet/physics_jet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpjet/errors.hpp"

namespace gpjet::jet {

bool MaterialProperties::valid() const noexcept {
  const double positive[] = {zero_shear_viscosity, relaxation_time, activation_energy_over_gas_constant,
                             density, heat_capacity, thermal_conductivity, electrical_conductivity,
                             surface_tension, beta, alpha, dielectric_ratio};
  for (double v : positive)
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  return beta < 1.0 && alpha < 1.0;
}

MaterialProperties pcl_material() {
  MaterialProperties m;
  m.zero_shear_viscosity = 1900.0;
  m.relaxation_time = 0.019;
  m.activation_energy_over_gas_constant = 7938.4;
  m.density = 1145.0;
  m.heat_capacity = 1340.0;
  m.thermal_conductivity = 0.14;
  m.electrical_conductivity = 9.5e-9;
  m.surface_tension = 0.0435;
  m.beta = 0.001;
  m.alpha = 0.015;
  m.dielectric_ratio = 2.9;
  return m;
}

bool DimensionlessGroups::valid() const noexcept {
  const double positive[] = {Re, Ca, Pe, De, Fe, Bi_L, Na, Gamma, chi};
  for (double v : positive)
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  return Bo >= 0.0 && beta > 0.0 && beta < 1.0 && std::isfinite(A_f) && std::isfinite(theta_inf) &&
         std::isfinite(beta_E) && std::isfinite(alpha) && std::isfinite(Pe_c);
}

DimensionlessGroups default_pcl_groups(double rheology_temperature_change) {
  const MaterialProperties pcl = pcl_material();
  DimensionlessGroups g;
  g.Re = 5.785e-6;
  g.Ca = 1048.276;
  g.Pe = 105.209;
  g.Pe_c = 0.1122;
  g.De = 1.14;
  g.Fe = 0.0254;
  g.Bi_L = 0.424;
  g.Na = 0.446;
  g.Gamma = 21.283;
  g.Bo = 0.0;
  g.beta = pcl.beta;
  g.beta_E = pcl.dielectric_ratio;
  g.alpha = pcl.alpha;
  g.chi = 17.5;
  g.A_f = pcl.activation_energy_over_gas_constant / rheology_temperature_change;
  g.theta_inf = -1.0;
  return g;
}

double shift_factor(double theta, const DimensionlessGroups& g) {
  return std::exp(g.A_f * (1.0 / (theta + g.Gamma) - 1.0 / g.Gamma));
}

double inlet_slope_residual(double slope, const DimensionlessGroups& g, double R) {
  const double s = std::sqrt(1.0 + slope * slope);
  return 6.0 / std::pow(R, 4) * slope * slope + (1.0 / (g.Ca * R * R) + g.Fe * R) * slope +
         2.0 * g.Fe / s * (1.0 - g.beta_E / s);
}

double initial_radius_slope(const DimensionlessGroups& g) {
  constexpr double kLower = -50.0;
  constexpr int kScan = 50000;
  const auto f = [&](double p) { return inlet_slope_residual(p, g); };

  double hi = 0.0;
  double f_hi = f(hi);
  if (!std::isfinite(f_hi)) fail(ErrorCode::NoRealRoot, "inlet slope residual not finite at 0");
  if (f_hi == 0.0) return 0.0;

  // Walk down from zero so the first bracket holds the smallest-magnitude root.
  for (int i = 1; i <= kScan; ++i) {
    const double lo = kLower * static_cast<double>(i) / kScan;
    const double f_lo = f(lo);
    if (f_lo == 0.0) {
      if (i == kScan) fail(ErrorCode::NoRealRoot, "inlet slope root sits on the bracket edge");
      return lo;
    }
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      double a = lo, b = hi, fa = f_lo;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      if (i == kScan && a - kLower < 1e-9)
        fail(ErrorCode::NoRealRoot, "inlet slope root sits on the bracket edge");
      return 0.5 * (a + b);
    }
    hi = lo;
    f_hi = f_lo;
  }
  fail(ErrorCode::NoRealRoot, "no sign change of the inlet slope residual in [-50, 0]");
}

JetState inlet_state(const DimensionlessGroups& g, double slope) {
  JetState s;
  s.z = 0.0;
  s.R = 1.0;
  s.V = 1.0;
  s.theta = 0.0;
  const double dV = -2.0 * slope;  // from R^2 V = 1 at R = V = 1
  const double f = shift_factor(0.0, g);
  s.tau_pzz = 2.0 * (1.0 - g.beta) * f * dV;
  s.tau_prr = -(1.0 - g.beta) * f * dV;
  return s;
}

namespace {

// Everything except the momentum balance, for a trial value of V'.
JetDerivatives assemble(const JetState& s, const DimensionlessGroups& g, double dV, double& momentum_residual) {
  JetDerivatives d;
  d.dV = dV;
  d.dR = -s.R * dV / (2.0 * s.V);

  const double root = std::sqrt(1.0 + d.dR * d.dR);
  const double field_den = (1.0 + 2.0 * s.z - s.z * s.z / g.chi) * root;
  d.E_t = 1.0 / field_den;
  d.dE_t = (-2.0 + 2.0 * s.z / g.chi) / field_den;
  d.sigma = s.R;
  const double dsigma = d.dR;

  const double f = shift_factor(s.theta, g);
  const double shifted = s.theta + g.Gamma;
  d.tau_zz = s.tau_pzz + 2.0 * g.beta * f * dV;
  d.tau_rr = s.tau_prr - g.beta * f * dV;
  const double normal_diff = d.tau_zz - d.tau_rr;

  d.dtheta = (g.Na * dV * normal_diff - 2.0 * g.Bi_L * (s.theta - g.theta_inf) / s.R) / (g.Pe * s.V);

  const double relax = shifted / (g.De * g.Gamma);
  const double mobility = g.alpha / (1.0 - g.beta);
  d.dtau_pzz = ((2.0 * (1.0 - g.beta) * f * dV - s.tau_pzz) * relax - mobility * s.tau_pzz * s.tau_pzz) / (f * s.V) +
               2.0 * dV * s.tau_pzz / s.V + s.tau_pzz * d.dtheta / shifted;
  d.dtau_prr = ((-(1.0 - g.beta) * f * dV - s.tau_prr) * relax - mobility * s.tau_prr * s.tau_prr) / (f * s.V) -
               dV * s.tau_prr / s.V;

  // (R^2 (tau_zz - tau_rr))' / R^2 with the polymer part carrying the gradient.
  const double tension_gradient = 2.0 * d.dR / s.R * normal_diff + (d.dtau_pzz - d.dtau_prr);
  const double electric = g.Fe * (d.sigma * dsigma + g.beta_E * d.E_t * d.dE_t + 2.0 * d.sigma * d.dE_t / s.R);
  const double rhs_momentum = g.Bo + tension_gradient + d.dR / (g.Ca * s.R * s.R) + electric;
  momentum_residual = g.Re * s.V * dV - rhs_momentum;
  return d;
}

}  // namespace

JetDerivatives rhs(const JetState& s, const DimensionlessGroups& g) {
  if (!(s.R > 0.0) || !(s.V > 0.0)) fail(ErrorCode::IntegrationFailure, "non-positive radius or speed");

  // The balance is affine in V' up to weak couplings (field slope factor,
  // viscous heating, solvent stress); each pass is one linear solve.
  double dV = 0.0;
  double residual = 0.0;
  JetDerivatives d;
  for (int it = 0; it < 100; ++it) {
    d = assemble(s, g, dV, residual);
    const double h = 1e-6 * std::max(1.0, std::abs(dV));
    double shifted_residual = 0.0;
    assemble(s, g, dV + h, shifted_residual);
    const double coefficient = (shifted_residual - residual) / h;
    if (!(std::abs(coefficient) > 1e-12))
      fail(ErrorCode::SingularAssembly, "momentum balance has vanishing V' coefficient");
    const double step = -residual / coefficient;
    dV += step;
    d.iterations = it + 1;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(dV))) {
      d = assemble(s, g, dV, residual);
      d.iterations = it + 1;
      return d;
    }
  }
  fail(ErrorCode::IntegrationFailure, "momentum balance did not converge");
}

namespace {

using Vec5 = std::array<double, 5>;

Vec5 pack(const JetState& s) { return {s.R, s.V, s.tau_pzz, s.tau_prr, s.theta}; }

JetState unpack(double z, const Vec5& y) { return {z, y[0], y[1], y[2], y[3], y[4]}; }

Vec5 eval(double z, const Vec5& y, const DimensionlessGroups& g) {
  const JetDerivatives d = rhs(unpack(z, y), g);
  return {d.dR, d.dV, d.dtau_pzz, d.dtau_prr, d.dtheta};
}

bool finite(const Vec5& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

JetSolution solve_jet_profile(const DimensionlessGroups& g, std::size_t n_points, const SolverOptions& opt) {
  require(n_points >= 16, "solve_jet_profile needs at least 16 grid points");
  require(g.valid(), "invalid dimensionless groups");

  const double slope = initial_radius_slope(g);

  JetSolution out;
  out.profile.z_grid.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    out.profile.z_grid[i] = g.chi * static_cast<double>(i) / static_cast<double>(n_points - 1);
  out.profile.z_grid.back() = g.chi;

  const JetState start = inlet_state(g, slope);
  Vec5 y = pack(start);
  double z = 0.0;
  out.trajectory.push_back(start);
  out.profile.radii.push_back(1.0);
  out.slopes.push_back(rhs(start, g).dR);

  Vec5 k1 = eval(z, y, g);
  double h = std::min(opt.initial_step, opt.max_step);
  std::size_t next = 1;
  std::size_t steps = 0;

  while (next < n_points) {
    if (++steps > opt.max_steps) fail(ErrorCode::IntegrationFailure, "step budget exhausted");
    const double target = out.profile.z_grid[next];
    bool lands = false;
    if (z + h >= target - 1e-14 * std::max(1.0, target)) {
      h = target - z;
      lands = true;
    }

    Vec5 y2, y3, y4, y5, y6, y7, err;
    Vec5 k2, k3, k4, k5, k6, k7;
    bool ok = true;
    try {
      for (int i = 0; i < 5; ++i) y2[i] = y[i] + h * a21 * k1[i];
      k2 = eval(z + c2 * h, y2, g);
      for (int i = 0; i < 5; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = eval(z + c3 * h, y3, g);
      for (int i = 0; i < 5; ++i) y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = eval(z + c4 * h, y4, g);
      for (int i = 0; i < 5; ++i) y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = eval(z + c5 * h, y5, g);
      for (int i = 0; i < 5; ++i)
        y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = eval(z + h, y6, g);
      for (int i = 0; i < 5; ++i)
        y7[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      k7 = eval(z + h, y7, g);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IntegrationFailure) throw;
      ok = false;
    }

    double err_norm = std::numeric_limits<double>::infinity();
    if (ok && finite(y7)) {
      double acc = 0.0;
      for (int i = 0; i < 5; ++i) {
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double scale = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y7[i]));
        acc += (err[i] / scale) * (err[i] / scale);
      }
      err_norm = std::sqrt(acc / 5.0);
    }

    if (err_norm <= 1.0) {
      z = lands ? target : z + h;
      y = y7;
      // Continuity holds algebraically; the carried speed is projected onto it.
      y[1] = 1.0 / (y[0] * y[0]);
      k1 = eval(z, y, g);
      ++out.steps_accepted;
      if (lands) {
        out.trajectory.push_back(unpack(z, y));
        out.profile.radii.push_back(y[0]);
        out.slopes.push_back(k1[0]);
        ++next;
      }
      const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
      h = std::min(opt.max_step, h * std::clamp(factor, 0.2, 5.0));
    } else {
      ++out.steps_rejected;
      const double factor = std::isfinite(err_norm) ? 0.9 * std::pow(err_norm, -0.25) : 0.1;
      h *= std::clamp(factor, 0.1, 0.5);
      if (h < opt.min_step) fail(ErrorCode::IntegrationFailure, "step size underflow at z = " + std::to_string(z));
    }
  }
  return out;
}

bool RadiusProfile::valid() const noexcept {
  if (z_grid.size() != radii.size() || z_grid.empty()) return false;
  if (radii.front() != 1.0) return false;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) return false;
    if (i > 0 && !(z_grid[i] > z_grid[i - 1])) return false;
  }
  return true;
}

}  // namespace gpjet::jet
