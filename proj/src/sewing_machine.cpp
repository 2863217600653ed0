#include "gpjet/sewing_machine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpjet/errors.hpp"

namespace gpjet::sewing {

std::string_view to_string(PatternClass p) noexcept {
  switch (p) {
    case PatternClass::SteadyCoiling: return "SteadyCoiling";
    case PatternClass::TranslatedCoiling: return "TranslatedCoiling";
    case PatternClass::AlternatingLoops: return "AlternatingLoops";
    case PatternClass::WPattern: return "WPattern";
    case PatternClass::Meanders: return "Meanders";
    case PatternClass::Straight: return "Straight";
  }
  return "Unknown";
}

ContactState default_initial_state(double coil_radius) {
  return {0.0, coil_radius, 0.0, std::numbers::pi / 2.0};
}

ContactDerivatives contact_rhs(const ContactState& st, double ratio, double rc) {
  if (st.r <= kPoleRadiusFraction * rc) fail(ErrorCode::PoleSingularity, "contact point at the polar origin");
  const double offset = st.theta - st.psi;
  const double c = std::cos(offset);
  const double sn = std::sin(offset);
  ContactDerivatives d;
  d.dr = c + ratio * std::cos(st.psi);
  d.dpsi = (sn - ratio * std::sin(st.psi)) / st.r;
  const double k = kCoilingConstant;
  d.dtheta = (1.0 / rc) * std::sqrt(st.r / rc) * (1.0 + k * k * c / (1.0 - k * c) * st.r) * sn;
  return d;
}

namespace {

// Near the pole psi' is undefined; the last finite value is reused.
ContactDerivatives regularized(const ContactState& st, double ratio, double rc, double& last_dpsi) {
  if (st.r <= kPoleRadiusFraction * rc) {
    const double offset = st.theta - st.psi;
    ContactDerivatives d;
    d.dr = std::cos(offset) + ratio * std::cos(st.psi);
    d.dpsi = last_dpsi;
    d.dtheta = 0.0;
    return d;
  }
  const ContactDerivatives d = contact_rhs(st, ratio, rc);
  last_dpsi = d.dpsi;
  return d;
}

}  // namespace

std::vector<ContactState> integrate_contact_path(double ratio, double rc, double s_max, double ds,
                                                 const ContactState& init) {
  require(ds > 0.0, "step must be positive");
  require(rc > 0.0, "coiling radius must be positive");
  require(ratio >= 0.0, "speed ratio must be non-negative");
  require(s_max >= 100.0 * rc - 1e-12, "path must be at least 100 R_c long");

  const auto steps = static_cast<std::size_t>(std::llround(s_max / ds));
  std::vector<ContactState> path;
  path.reserve(steps + 1);
  ContactState st = init;
  st.s = 0.0;
  path.push_back(st);
  double last_dpsi = 0.0;

  const auto shifted = [](const ContactState& base, const ContactDerivatives& k, double h) {
    return ContactState{base.s + h, base.r + h * k.dr, base.psi + h * k.dpsi, base.theta + h * k.dtheta};
  };

  for (std::size_t i = 0; i < steps; ++i) {
    const ContactDerivatives k1 = regularized(st, ratio, rc, last_dpsi);
    const ContactDerivatives k2 = regularized(shifted(st, k1, ds / 2), ratio, rc, last_dpsi);
    const ContactDerivatives k3 = regularized(shifted(st, k2, ds / 2), ratio, rc, last_dpsi);
    const ContactDerivatives k4 = regularized(shifted(st, k3, ds), ratio, rc, last_dpsi);
    ContactState next;
    next.s = static_cast<double>(i + 1) * ds;
    next.r = st.r + ds / 6.0 * (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr);
    next.psi = st.psi + ds / 6.0 * (k1.dpsi + 2 * k2.dpsi + 2 * k3.dpsi + k4.dpsi);
    next.theta = st.theta + ds / 6.0 * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta);
    if (!std::isfinite(next.r) || !std::isfinite(next.psi) || !std::isfinite(next.theta))
      fail(ErrorCode::IntegrationFailure, "contact path became non-finite");
    st = next;
    path.push_back(st);
  }
  return path;
}

Trace reconstruct_trace(const std::vector<ContactState>& path, double ratio, double total_time) {
  require(!path.empty(), "empty contact path");
  Trace t;
  t.ratio = ratio;
  t.pattern = classify_pattern(ratio);
  t.points.reserve(path.size());
  t.s.reserve(path.size());
  for (const ContactState& c : path) {
    t.points.push_back({c.r * std::cos(c.psi) + ratio * (total_time - c.s), c.r * std::sin(c.psi)});
    t.s.push_back(c.s);
  }
  return t;
}

PatternClass classify_pattern(double ratio) {
  if (!(ratio >= 0.0)) fail(ErrorCode::NegativeRatio, "speed ratio must be non-negative");
  if (ratio == 0.0) return PatternClass::SteadyCoiling;
  if (ratio < 0.355) return PatternClass::TranslatedCoiling;
  if (ratio < 0.56) return PatternClass::AlternatingLoops;
  if (ratio < 0.735) return PatternClass::WPattern;
  if (ratio < 1.0) return PatternClass::Meanders;
  return PatternClass::Straight;
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::size_t count_self_intersections(const std::vector<Point2>& pts) {
  if (pts.size() < 4) return 0;
  const std::size_t n = pts.size() - 1;

  struct Box {
    double xmin, xmax, ymin, ymax;
    std::size_t index;
  };
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[i + 1];
    boxes[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y), i};
  }
  std::sort(boxes.begin(), boxes.end(), [](const Box& l, const Box& r) { return l.xmin < r.xmin; });

  std::size_t count = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const Box& bu = boxes[u];
    for (std::size_t v = u + 1; v < n && boxes[v].xmin <= bu.xmax; ++v) {
      const Box& bv = boxes[v];
      const std::size_t i = std::min(bu.index, bv.index);
      const std::size_t j = std::max(bu.index, bv.index);
      if (j - i < 2) continue;
      if (bv.ymin > bu.ymax || bv.ymax < bu.ymin) continue;
      const Point2 &a = pts[i], &b = pts[i + 1], &c = pts[j], &d = pts[j + 1];
      const double d1 = cross(a, b, c), d2 = cross(a, b, d);
      const double d3 = cross(c, d, a), d4 = cross(c, d, b);
      if (d1 * d2 < 0.0 && d3 * d4 < 0.0) ++count;
    }
  }
  return count;
}

double self_intersection_density(const Trace& trace, double s_from) {
  std::vector<Point2> window;
  for (std::size_t i = 0; i < trace.points.size(); ++i)
    if (trace.s[i] >= s_from) window.push_back(trace.points[i]);
  if (window.size() < 2) return 0.0;
  double length = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i)
    length += std::hypot(window[i].x - window[i - 1].x, window[i].y - window[i - 1].y);
  if (length <= 0.0) return 0.0;
  return static_cast<double>(count_self_intersections(window)) / length;
}

double lag_lowfidelity(double ratio, double rc, const LagOptions& opt) {
  if (!(ratio >= 1.0)) fail(ErrorCode::UnstableRegime, "no straight deposition below speed ratio 1");
  const double horizon = std::max(opt.horizon * rc, 100.0 * rc);
  const auto contact_x = [&](double u) {
    const auto path = integrate_contact_path(u, rc, horizon, opt.ds * rc, default_initial_state(rc));
    const ContactState& end = path.back();
    return end.r * std::cos(end.psi);
  };
  const double neutral = contact_x(1.0);
  return std::abs(contact_x(ratio) - neutral);
}

}  // namespace gpjet::sewing
