#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gpjet::jet {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SwarmOptions {
  int particles = 16;
  int iterations = 50;
  double inertia = 0.729;
  double cognitive = 1.494;
  double social = 1.494;
};

struct PsoResult {
  std::vector<double> best;
  double misfit = 0.0;
  std::vector<double> trace;  // best-seen misfit after each iteration
  int evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Global-best particle swarm over a box. Non-finite misfits count as +inf.
PsoResult fit_parameters_pso(const Objective& objective, std::span<const Interval> bounds,
                             const SwarmOptions& swarm, std::uint64_t seed);

}  // namespace gpjet::jet
