#include "gpjet/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gpjet/errors.hpp"

namespace gpjet::jet {

PsoResult fit_parameters_pso(const Objective& objective, std::span<const Interval> bounds,
                             const SwarmOptions& swarm, std::uint64_t seed) {
  require(!bounds.empty(), "PSO needs at least one parameter");
  require(swarm.particles >= 4, "PSO needs at least 4 particles");
  require(swarm.iterations >= 1, "PSO needs at least one iteration");
  for (const Interval& b : bounds)
    require(std::isfinite(b.lo) && std::isfinite(b.hi) && b.hi > b.lo, "PSO bounds must be finite and non-empty");

  const std::size_t dim = bounds.size();
  const auto n = static_cast<std::size_t>(swarm.particles);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto score = [&](const std::vector<double>& x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pos(n, std::vector<double>(dim)), vel(n, std::vector<double>(dim));
  std::vector<std::vector<double>> best_pos(n);
  std::vector<double> best_val(n);

  PsoResult result;
  result.misfit = std::numeric_limits<double>::infinity();

  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double span = bounds[d].hi - bounds[d].lo;
      pos[p][d] = bounds[d].lo + span * unit(rng);
      vel[p][d] = span * (unit(rng) - 0.5) * 0.2;
    }
    best_pos[p] = pos[p];
    best_val[p] = score(pos[p]);
    ++result.evaluations;
    if (best_val[p] < result.misfit) {
      result.misfit = best_val[p];
      result.best = pos[p];
    }
  }
  if (result.best.empty()) result.best = pos[0];

  for (int it = 0; it < swarm.iterations; ++it) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double span = bounds[d].hi - bounds[d].lo;
        const double r1 = unit(rng), r2 = unit(rng);
        double v = swarm.inertia * vel[p][d] + swarm.cognitive * r1 * (best_pos[p][d] - pos[p][d]) +
                   swarm.social * r2 * (result.best[d] - pos[p][d]);
        v = std::clamp(v, -0.5 * span, 0.5 * span);
        double x = pos[p][d] + v;
        if (x < bounds[d].lo) {
          x = bounds[d].lo;
          v = 0.0;
        } else if (x > bounds[d].hi) {
          x = bounds[d].hi;
          v = 0.0;
        }
        vel[p][d] = v;
        pos[p][d] = x;
      }
      const double val = score(pos[p]);
      ++result.evaluations;
      if (val < best_val[p]) {
        best_val[p] = val;
        best_pos[p] = pos[p];
      }
      if (val < result.misfit) {
        result.misfit = val;
        result.best = pos[p];
      }
    }
    result.trace.push_back(result.misfit);
  }
  return result;
}

}  // namespace gpjet::jet
