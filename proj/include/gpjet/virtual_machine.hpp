#pragma once

// Emulated 12-setting printing machine: settings table plus a synthetic
// ground truth that serves noisy radius and lag observations.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gpjet/physics_jet.hpp"
#include "gpjet/sewing_machine.hpp"

namespace gpjet::vm {

struct MachineSetting {
  int id = 0;
  double air_pressure_bar = 0.0;
  double tip_to_collector_mm = 0.0;
  double collector_speed_mm_s = 0.0;
  int frames = 0;
  double duration_s = 0.0;
};

/// The curated dataset, verbatim.
const std::vector<MachineSetting>& list_settings();

/// CSV with the table's column order and shortest round-trip number format.
std::string settings_csv(std::span<const MachineSetting> settings);

struct TruthOptions {
  double bump_amplitude = 0.08;  // Taylor-cone discrepancy at the nozzle
  double bump_scale = 2.0;       // decay length in Z/R0 units
  double sigma_radius = 0.01;    // normalized radius
  double sigma_lag = 0.02;       // mm
  double jet_speed_mm_s = 300.0; // V_jm
  double lag_offset_mm = 0.2;    // lag at the neutral ratio
  double lag_scale_mm = 0.1;     // mm per coil radius of sewing-machine offset
  double coil_radius = 1.0;
  sewing::LagOptions lag{};
  std::size_t physics_points = 921;
};

class VirtualMachine {
 public:
  explicit VirtualMachine(const jet::DimensionlessGroups& groups = jet::default_pcl_groups(),
                          const TruthOptions& options = {});

  const jet::DimensionlessGroups& groups() const noexcept { return groups_; }
  const TruthOptions& options() const noexcept { return opt_; }
  double chi() const noexcept { return groups_.chi; }

  /// Physics solve without the discrepancy bump (the low-fidelity source).
  double radius_physics(double z) const;
  /// Ground truth: physics times (1 + a exp(-(z/z_c)^2)).
  double radius_truth(double z) const;
  /// Noisy high-fidelity radii; each value is seeded by (seed, z).
  std::vector<double> observe_radius(std::span<const double> z_points, std::uint64_t seed) const;

  /// Noise-free lag in mm; throws UnstableRegime below ratio 1.
  double lag_truth(double ratio) const;
  /// Throws NonPositiveRatio for ratio <= 0 and UnstableRegime below 1.
  double observe_lag(double ratio, std::uint64_t seed) const;

  double speed_ratio(const MachineSetting& setting) const noexcept {
    return setting.collector_speed_mm_s / opt_.jet_speed_mm_s;
  }

  const jet::RadiusProfile& dense_profile() const noexcept { return dense_.profile; }

 private:
  jet::DimensionlessGroups groups_;
  TruthOptions opt_;
  jet::JetSolution dense_;
};

/// Standard normal draw fully determined by (seed, query bits).
double seeded_normal(std::uint64_t seed, double query);

}  // namespace gpjet::vm
