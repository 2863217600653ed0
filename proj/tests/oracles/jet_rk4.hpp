#pragma once

// Fixed-step classical RK4 on the jet equations with no continuity
// projection, used as a fine-step reference for the adaptive solver.

#include <array>
#include <vector>

#include "gpjet/physics_jet.hpp"

namespace oracle {

using JetVec = std::array<double, 5>;  // R, V, tau_pzz, tau_prr, theta

inline JetVec pack(const gpjet::jet::JetState& s) { return {s.R, s.V, s.tau_pzz, s.tau_prr, s.theta}; }

inline gpjet::jet::JetState unpack(double z, const JetVec& v) { return {z, v[0], v[1], v[2], v[3], v[4]}; }

inline JetVec slope(double z, const JetVec& v, const gpjet::jet::DimensionlessGroups& g) {
  const auto d = gpjet::jet::rhs(unpack(z, v), g);
  return {d.dR, d.dV, d.dtau_pzz, d.dtau_prr, d.dtheta};
}

/// States at z = k h for k = 0..steps, starting from `init` at z = 0.
inline std::vector<JetVec> integrate_rk4(const gpjet::jet::JetState& init, const gpjet::jet::DimensionlessGroups& g,
                                         double h, int steps) {
  std::vector<JetVec> out{pack(init)};
  out.reserve(static_cast<std::size_t>(steps) + 1);
  JetVec y = out.front();
  const auto axpy = [](const JetVec& a, double t, const JetVec& b) {
    JetVec r{};
    for (int i = 0; i < 5; ++i) r[i] = a[i] + t * b[i];
    return r;
  };
  for (int k = 0; k < steps; ++k) {
    const double z = k * h;
    const JetVec k1 = slope(z, y, g);
    const JetVec k2 = slope(z + 0.5 * h, axpy(y, 0.5 * h, k1), g);
    const JetVec k3 = slope(z + 0.5 * h, axpy(y, 0.5 * h, k2), g);
    const JetVec k4 = slope(z + h, axpy(y, h, k3), g);
    for (int i = 0; i < 5; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.push_back(y);
  }
  return out;
}

}  // namespace oracle
