#pragma once

#include <string>
#include <vector>

namespace oamp {

/// A line plot with an optional shaded band (y - lo .. y + hi around points).
struct SvgSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // half-width per point; empty for no band
  bool markers = false;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  int width = 640;
  int height = 420;
};

/// Self-contained SVG document. Non-finite points are skipped.
std::string render_svg(const SvgPlot& plot);

}  // namespace oamp
