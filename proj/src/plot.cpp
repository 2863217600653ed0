#include "gpjet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpjet/errors.hpp"
#include "gpjet/format.hpp"
#include "gpjet/planner.hpp"

namespace gpjet::plot {

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string point(double x, double y) { return shortest(x) + ',' + shortest(y); }

}  // namespace

std::string emit_plot(const PlotTrace& t, PlotKind kind) {
  if (t.x.empty() || t.x.size() != t.mean.size()) fail(ErrorCode::EmptyTrace, "nothing to plot");
  const bool band = kind == PlotKind::Posterior && t.sd.size() == t.x.size();
  require(t.obs_x.size() == t.obs_y.size(), "observation arrays differ in length");

  const double z = planner::kCiHalfWidthZ;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  const auto extend = [&](double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    extend(t.x[i], t.mean[i]);
    if (band) {
      extend(t.x[i], t.mean[i] - z * t.sd[i]);
      extend(t.x[i], t.mean[i] + z * t.sd[i]);
    }
  }
  for (std::size_t i = 0; i < t.obs_x.size(); ++i) extend(t.obs_x[i], t.obs_y[i]);
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  // data -> canvas: X = kLeft + sx (x - x0), Y = kTop + ph - sy (y - y0)
  const std::string transform = "matrix(" + shortest(sx) + " 0 0 " + shortest(-sy) + ' ' +
                                shortest(kLeft - sx * x0) + ' ' + shortest(kTop + ph + sy * y0) + ')';

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + shortest(kWidth) + "\" height=\"" + shortest(kHeight) +
         "\" viewBox=\"0 0 " + shortest(kWidth) + ' ' + shortest(kHeight) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + shortest(kWidth) + "\" height=\"" + shortest(kHeight) +
         "\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + shortest(kLeft) + "\" y=\"" + shortest(kTop) + "\" width=\"" + shortest(pw) + "\" height=\"" +
         shortest(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + shortest(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(t.title) + "</text>\n";
  svg += "<text x=\"" + shortest(kLeft + pw / 2) + "\" y=\"" + shortest(kHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + escape(t.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + shortest(kTop + ph / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         shortest(kTop + ph / 2) + ")\">" + escape(t.y_label) + "</text>\n";
  // axis range labels
  svg += "<text x=\"" + shortest(kLeft) + "\" y=\"" + shortest(kTop + ph + 16) + "\" font-size=\"10\">" + shortest(x0) +
         "</text>\n";
  svg += "<text x=\"" + shortest(kLeft + pw) + "\" y=\"" + shortest(kTop + ph + 16) +
         "\" text-anchor=\"end\" font-size=\"10\">" + shortest(x1) + "</text>\n";
  svg += "<text x=\"" + shortest(kLeft - 4) + "\" y=\"" + shortest(kTop + ph) + "\" text-anchor=\"end\" font-size=\"10\">" +
         shortest(y0) + "</text>\n";
  svg += "<text x=\"" + shortest(kLeft - 4) + "\" y=\"" + shortest(kTop + 10) +
         "\" text-anchor=\"end\" font-size=\"10\">" + shortest(y1) + "</text>\n";

  svg += "<g id=\"data\" transform=\"" + transform + "\">\n";
  if (band) {
    std::string pts;
    for (std::size_t i = 0; i < t.x.size(); ++i) pts += point(t.x[i], t.mean[i] + z * t.sd[i]) + ' ';
    for (std::size_t i = t.x.size(); i-- > 0;) pts += point(t.x[i], t.mean[i] - z * t.sd[i]) + ' ';
    pts.pop_back();
    svg += "<polygon id=\"ci95\" points=\"" + pts + "\" fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\"/>\n";
  }
  std::string line;
  for (std::size_t i = 0; i < t.x.size(); ++i) line += point(t.x[i], t.mean[i]) + ' ';
  line.pop_back();
  svg += "<polyline id=\"mean\" points=\"" + line +
         "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\"/>\n";
  svg += "</g>\n";
  // Markers are placed in canvas units so they stay round.
  for (std::size_t i = 0; i < t.obs_x.size(); ++i) {
    const double cx = kLeft + sx * (t.obs_x[i] - x0);
    const double cy = kTop + ph - sy * (t.obs_y[i] - y0);
    svg += "<circle class=\"obs\" cx=\"" + shortest(cx) + "\" cy=\"" + shortest(cy) +
           "\" r=\"4\" fill=\"#cb181d\" stroke=\"black\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gpjet::plot
