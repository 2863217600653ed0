#pragma once

// Raster jet metrology: per-row edge scans of silhouette frames, derived
// diameters, areas, angles, x-velocities and lag, plus a synthetic renderer.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpjet/physics_jet.hpp"

namespace gpjet::metrology {

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
  double cf = 0.0;                   // mm per pixel
  double fps = 50.0;
  int nozzle_x = 0;
  int collector_row = 0;
  bool binary = false;  // pure 0/255 silhouette; skips edge binarization

  bool valid() const noexcept;
  std::uint8_t at(int row, int col) const noexcept {
    return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
  }
};

struct Geometry {
  double cf = 0.008;
  int width = 640;
  int height = 480;
  int nozzle_x = 320;
  int collector_row = 440;
  double fps = 50.0;
  double nozzle_radius_mm = 0.2;  // R0: converts the normalized profile to mm
};

struct RenderNoise {
  int edge_jitter_px = 0;
  std::uint64_t seed = 0;
};

/// Piecewise-linear radius of a profile at z, clamped to its ends.
double profile_radius_at(const jet::RadiusProfile& profile, double z);

/// Binary silhouette of the jet. Row r maps to z = r cf / R0; the centerline
/// bends as (r / (collector_row - 1))^2 so the last jet row sits at
/// nozzle_x + lag / cf. Throws GeometryOverflow when the jet leaves the frame.
Frame render_synthetic_frame(const jet::RadiusProfile& profile, double lag_mm, const Geometry& geometry,
                             const RenderNoise& noise = {});

struct RowFeature {
  int row = 0;
  int le = -1;
  int re = -1;
  double diameter_mm = 0.0;
  double area_mm2 = 0.0;
  double theta_l = 0.0;
  double theta_r = 0.0;
  bool empty = false;
};

struct JetFeatures {
  std::vector<RowFeature> rows;
  int stride = 0;
  std::optional<double> lag_mm;
  double processing_time = 0.0;
  std::string error;  // per-frame failure carried in-band
};

struct ScanOptions {
  int canny_lo = 150;
  int canny_hi = 255;
  bool trapezoid_half_factor = false;
};

/// Scanned rows are collector_row - 1 - k stride, reported top to bottom;
/// there are floor(collector_row / stride) of them.
std::vector<int> scan_rows(int collector_row, int stride);

JetFeatures edge_scan(const Frame& frame, int stride, const ScanOptions& options = {});

/// Per-row x-velocity from right-edge motion, mm/s. Throws RowMismatch.
std::vector<double> jet_velocity(const JetFeatures& prev, const JetFeatures& cur, double cf, double fps);

/// Signed lag from the deposition point at the last scanned row.
/// Throws NoDeposition when that row is empty.
double lag_from_frame(const Frame& frame, const JetFeatures& features);

enum class ExecutionMode { Sequential, PipelinedIO, ParallelScan };
std::string_view to_string(ExecutionMode mode) noexcept;

struct ModeReport {
  ExecutionMode mode = ExecutionMode::Sequential;
  std::size_t frames = 0;
  int workers = 1;
  double mean_frame_s = 0.0;  // mean per-frame processing time
  double p95_frame_s = 0.0;
  double wall_s = 0.0;
  double throughput_frame_s = 0.0;  // wall time / frames
};

struct StreamResult {
  std::vector<JetFeatures> features;
  ModeReport report;
};

/// Pulls frames until the source returns nullopt.
using FrameSource = std::function<std::optional<Frame>()>;

/// Upper bound on worker threads: GPJET_THREADS if set, else hardware.
int worker_cap();

/// Scans every frame (including lag) and returns the results in input order.
StreamResult process_stream(const FrameSource& source, int stride, int workers,
                            ExecutionMode mode = ExecutionMode::ParallelScan, const ScanOptions& options = {});

/// Row-level CSV without timing, so outputs are comparable across runs.
std::string features_csv(const std::vector<JetFeatures>& stream);
/// Per-frame CSV: frame,lag_mm,proc_time_s.
std::string frames_csv(const std::vector<JetFeatures>& stream);

/// Binary PGM (P5) I/O. Reading marks frames holding only 0/255 as binary.
void write_pgm(const std::string& path, const Frame& frame);
Frame read_pgm(const std::string& path, const Geometry& geometry);

}  // namespace gpjet::metrology
