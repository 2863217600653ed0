#include "gpjet/virtual_machine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "gpjet/errors.hpp"
#include "gpjet/format.hpp"

namespace gpjet::vm {

const std::vector<MachineSetting>& list_settings() {
  static const std::vector<MachineSetting> table{
      {1, 1.2, 3.5, 191.2, 1341, 26.82},  {2, 1.2, 3.5, 212.5, 1672, 33.44}, {3, 1.2, 3.5, 255, 1437, 28.74},
      {4, 1.2, 3.5, 340, 1343, 26.86},    {5, 1.2, 3.5, 510, 648, 12.96},    {6, 1.2, 3.5, 850, 613, 12.26},
      {7, 1.2, 3.5, 1530, 457, 9.14},     {8, 1.2, 3.5, 2890, 401, 8.02},    {9, 2.4, 4.5, 292.5, 1108, 22.16},
      {10, 2.4, 4.5, 520, 802, 16.04},    {11, 2.4, 4.5, 1300, 812, 16.24},  {12, 2.4, 4.5, 4420, 284, 5.68},
  };
  return table;
}

std::string settings_csv(std::span<const MachineSetting> settings) {
  std::string out = "setting,air_pressure_bar,tip_to_collector_mm,collector_speed_mm_s,frames,duration_s\n";
  for (const MachineSetting& s : settings) {
    out += std::to_string(s.id) + ',' + shortest(s.air_pressure_bar) + ',' + shortest(s.tip_to_collector_mm) + ',' +
           shortest(s.collector_speed_mm_s) + ',' + std::to_string(s.frames) + ',' + shortest(s.duration_s) + '\n';
  }
  return out;
}

double seeded_normal(std::uint64_t seed, double query) {
  std::uint64_t z = seed ^ (std::bit_cast<std::uint64_t>(query) * 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  std::mt19937_64 rng(z);
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

VirtualMachine::VirtualMachine(const jet::DimensionlessGroups& groups, const TruthOptions& options)
    : groups_(groups), opt_(options) {
  require(opt_.jet_speed_mm_s > 0.0, "jet speed must be positive");
  require(opt_.sigma_radius >= 0.0 && opt_.sigma_lag >= 0.0, "noise levels must be non-negative");
  require(opt_.bump_scale > 0.0, "bump scale must be positive");
  require(opt_.physics_points >= 16, "physics grid too coarse");
  dense_ = jet::solve_jet_profile(groups_, opt_.physics_points);
}

double VirtualMachine::radius_physics(double z) const {
  if (!(z >= 0.0 && z <= groups_.chi)) fail(ErrorCode::OutOfDomain, "z outside [0, chi]");
  const auto& zs = dense_.profile.z_grid;
  const auto& rs = dense_.profile.radii;
  const auto& ds = dense_.slopes;
  auto it = std::upper_bound(zs.begin(), zs.end(), z);
  std::size_t i = it == zs.begin() ? 0 : static_cast<std::size_t>(it - zs.begin()) - 1;
  if (i + 1 >= zs.size()) return rs.back();
  const double h = zs[i + 1] - zs[i];
  const double t = (z - zs[i]) / h;
  if (t == 0.0) return rs[i];
  // Cubic Hermite on values and the solver's own slopes.
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * rs[i] + (t3 - 2 * t2 + t) * h * ds[i] + (-2 * t3 + 3 * t2) * rs[i + 1] +
         (t3 - t2) * h * ds[i + 1];
}

double VirtualMachine::radius_truth(double z) const {
  const double u = z / opt_.bump_scale;
  return radius_physics(z) * (1.0 + opt_.bump_amplitude * std::exp(-u * u));
}

std::vector<double> VirtualMachine::observe_radius(std::span<const double> z_points, std::uint64_t seed) const {
  std::vector<double> out;
  out.reserve(z_points.size());
  for (double z : z_points) {
    const double truth = radius_truth(z);
    out.push_back(opt_.sigma_radius > 0.0 ? truth + opt_.sigma_radius * seeded_normal(seed, z) : truth);
  }
  return out;
}

double VirtualMachine::lag_truth(double ratio) const {
  const double offset = sewing::lag_lowfidelity(ratio, opt_.coil_radius, opt_.lag);
  return opt_.lag_offset_mm + opt_.lag_scale_mm * offset / (opt_.lag.horizon * opt_.coil_radius);
}

double VirtualMachine::observe_lag(double ratio, std::uint64_t seed) const {
  if (!(ratio > 0.0)) fail(ErrorCode::NonPositiveRatio, "speed ratio must be positive");
  const double truth = lag_truth(ratio);
  return opt_.sigma_lag > 0.0 ? truth + opt_.sigma_lag * seeded_normal(seed, ratio) : truth;
}

}  // namespace gpjet::vm
