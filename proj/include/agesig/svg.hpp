#pragma once

#include <string>
#include <vector>

namespace agesig {

// One polyline in data coordinates.
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#444444";
  double width = 1.0;
};

struct SvgMarker {
  double x = 0.0;
  double y = 0.0;
  std::string color = "#d62728";
};

// A single framed chart with axes, tick labels and a title.
struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::vector<SvgMarker> markers;
};

// Static, deterministic SVG. Coordinates are formatted with fixed precision
// so identical inputs produce identical bytes.
std::string render_chart(const SvgChart& chart, int width = 640, int height = 420);

// Grid of small charts, ceil(sqrt(n)) columns.
std::string render_panel_grid(const std::vector<SvgChart>& charts,
                              int panel_width = 320, int panel_height = 240);

}  // namespace agesig
