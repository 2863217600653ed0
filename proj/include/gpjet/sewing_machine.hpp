#pragma once

// Quasistatic geometric model of a viscous thread falling on a moving belt
// (the "fluid-mechanical sewing machine"). Lengths are in the same unit as the
// steady coiling radius R_c; arc length s doubles as V_jm-normalized time.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace gpjet::sewing {

inline constexpr double kCoilingConstant = 0.715;
inline constexpr double kPoleRadiusFraction = 1e-6;

struct ContactState {
  double s = 0.0;
  double r = 0.0;
  double psi = 0.0;
  double theta = 0.0;
};

struct ContactDerivatives {
  double dr = 0.0;
  double dpsi = 0.0;
  double dtheta = 0.0;
};

enum class PatternClass { SteadyCoiling, TranslatedCoiling, AlternatingLoops, WPattern, Meanders, Straight };

std::string_view to_string(PatternClass p) noexcept;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Trace {
  std::vector<Point2> points;
  std::vector<double> s;  // arc length of each point
  double ratio = 0.0;
  PatternClass pattern = PatternClass::SteadyCoiling;
};

/// Starting contact state: on the steady coiling orbit.
ContactState default_initial_state(double coil_radius = 1.0);

/// Contact-point equations. Throws PoleSingularity when r <= 1e-6 R_c.
ContactDerivatives contact_rhs(const ContactState& state, double ratio, double coil_radius);

/// Fixed-step RK4 path of the contact point for s in [0, s_max].
std::vector<ContactState> integrate_contact_path(double ratio, double coil_radius, double s_max, double ds,
                                                 const ContactState& init);

/// Deposited trace q(s, T) = r(s) + ratio (T - s) e_x.
Trace reconstruct_trace(const std::vector<ContactState>& path, double ratio, double total_time);

/// Ratio-band pattern label; throws NegativeRatio below zero.
PatternClass classify_pattern(double ratio);

/// Proper crossings between non-adjacent segments of the polyline.
std::size_t count_self_intersections(const std::vector<Point2>& points);

/// Self-intersections per unit trace length over the points with s >= s_from.
double self_intersection_density(const Trace& trace, double s_from);

struct LagOptions {
  double horizon = 100.0;  // in units of R_c
  double ds = 0.01;
};

/// Low-fidelity lag surrogate: along-x offset of the contact point at the
/// horizon, measured from its position for the neutral ratio 1.
/// Throws UnstableRegime for ratio < 1.
double lag_lowfidelity(double ratio, double coil_radius, const LagOptions& options = {});

}  // namespace gpjet::sewing
