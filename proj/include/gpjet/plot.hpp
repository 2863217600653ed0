#pragma once

// Self-contained SVG rendering of posterior curves and convergence traces.

#include <string>
#include <vector>

namespace gpjet::plot {

enum class PlotKind {
  Posterior,    // mean curve, 95% band, observation markers
  Convergence,  // metric per iteration, no band
};

struct PlotTrace {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> sd;  // empty for convergence plots
  std::vector<double> obs_x;
  std::vector<double> obs_y;
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Plot geometry is drawn inside a group whose transform maps data units to
/// the canvas, so the band polygon's coordinates are data values.
/// Throws EmptyTrace when there is nothing to draw.
std::string emit_plot(const PlotTrace& trace, PlotKind kind);

}  // namespace gpjet::plot
