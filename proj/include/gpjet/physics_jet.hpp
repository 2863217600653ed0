#pragma once

// Steady one-dimensional thin-filament model of a non-isothermal viscoelastic
// electrohydrodynamic jet, written in nondimensional form. Lengths are scaled
// by the nozzle radius R0, speeds by the nozzle exit speed.

#include <array>
#include <cstddef>
#include <vector>

namespace gpjet::jet {

/// Dimensional properties of the polymer melt (SI units).
struct MaterialProperties {
  double zero_shear_viscosity = 0.0;                 // Pa s
  double relaxation_time = 0.0;                      // s
  double activation_energy_over_gas_constant = 0.0;  // K
  double density = 0.0;                              // kg/m^3
  double heat_capacity = 0.0;                        // J/(kg K)
  double thermal_conductivity = 0.0;                 // W/(m K)
  double electrical_conductivity = 0.0;              // S/m
  double surface_tension = 0.0;                      // N/m
  double beta = 0.0;                                 // solvent / zero-shear viscosity
  double alpha = 0.0;                                // Giesekus mobility factor
  double dielectric_ratio = 0.0;                     // eps / eps0

  bool valid() const noexcept;
};

/// Polycaprolactone (PCL) melt properties.
MaterialProperties pcl_material();

/// Temperature change that substantially alters the melt rheology. Only used
/// to build the activation ratio A_f; configurable because no value is known.
inline constexpr double kDefaultRheologyTemperatureChange = 373.0;  // K

struct DimensionlessGroups {
  double Re = 0.0;
  double Ca = 0.0;
  double Pe = 0.0;
  double Pe_c = 0.0;  // carried for completeness; no equation uses it
  double De = 0.0;
  double Fe = 0.0;
  double Bi_L = 0.0;
  double Na = 0.0;
  double Gamma = 0.0;
  double Bo = 0.0;
  double beta = 0.0;
  double beta_E = 0.0;
  double alpha = 0.0;
  double chi = 0.0;        // aspect ratio Z/R0 (jet length)
  double A_f = 0.0;        // activation ratio dH / (R_ig dT_Rh)
  double theta_inf = 0.0;  // ambient dimensionless temperature

  bool valid() const noexcept;
};

/// Typical PCL groups; A_f and theta_inf come from the configurable defaults.
DimensionlessGroups default_pcl_groups(double rheology_temperature_change = kDefaultRheologyTemperatureChange);

/// Point on the jet. V is carried explicitly even though continuity fixes it.
struct JetState {
  double z = 0.0;
  double R = 1.0;
  double V = 1.0;
  double tau_pzz = 0.0;
  double tau_prr = 0.0;
  double theta = 0.0;
};

/// d/dz of the carried variables together with the derived per-point fields.
struct JetDerivatives {
  double dR = 0.0;
  double dV = 0.0;
  double dtau_pzz = 0.0;
  double dtau_prr = 0.0;
  double dtheta = 0.0;

  double tau_zz = 0.0;
  double tau_rr = 0.0;
  double E_t = 0.0;
  double dE_t = 0.0;
  double sigma = 0.0;
  int iterations = 0;
};

struct RadiusProfile {
  std::vector<double> z_grid;
  std::vector<double> radii;

  bool valid() const noexcept;
};

struct JetSolution {
  RadiusProfile profile;
  std::vector<JetState> trajectory;  // one state per profile grid point
  std::vector<double> slopes;        // dR/dz at each grid point
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

struct SolverOptions {
  double rtol = 1e-8;
  double atol = 1e-9;
  double max_step = 0.25;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  std::size_t max_steps = 200000;
};

/// Shear-thinning temperature shift factor f(theta).
double shift_factor(double theta, const DimensionlessGroups& groups);

/// Residual of the inlet slope condition at radius R for slope R'.
double inlet_slope_residual(double slope, const DimensionlessGroups& groups, double R = 1.0);

/// Inlet slope R'(0): non-positive root of smallest magnitude within [-50, 0].
/// Throws NoRealRoot when no sign change is bracketed.
double initial_radius_slope(const DimensionlessGroups& groups);

/// Polymer stresses and temperature at the nozzle for a given inlet slope.
JetState inlet_state(const DimensionlessGroups& groups, double slope);

/// Right-hand side of the five carried equations. V' is obtained from the
/// momentum balance after the constitutive rate equations are substituted.
/// Throws SingularAssembly when the V' coefficient vanishes.
JetDerivatives rhs(const JetState& state, const DimensionlessGroups& groups);

/// Integrates from z = 0 to z = chi and samples n_points equally spaced
/// stations. Continuity is re-imposed after every accepted step.
JetSolution solve_jet_profile(const DimensionlessGroups& groups, std::size_t n_points,
                              const SolverOptions& options = {});

}  // namespace gpjet::jet
