#include "agesig/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace agesig {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Extent {
  double x_min = std::numeric_limits<double>::max();
  double x_max = std::numeric_limits<double>::lowest();
  double y_min = std::numeric_limits<double>::max();
  double y_max = std::numeric_limits<double>::lowest();

  void include(double x, double y) {
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }

  void finish() {
    if (x_min > x_max) {
      x_min = 0.0;
      x_max = 1.0;
    }
    if (y_min > y_max) {
      y_min = 0.0;
      y_max = 1.0;
    }
    if (x_max - x_min < 1e-12) x_max = x_min + 1.0;
    if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  }
};

void render_chart_into(std::ostringstream& out, const SvgChart& chart,
                       double ox, double oy, int width, int height) {
  const double ml = 52, mr = 12, mt = 26, mb = 36;  // margins
  double pw = width - ml - mr;
  double ph = height - mt - mb;

  Extent ext;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) ext.include(s.x[i], s.y[i]);
  }
  for (const auto& m : chart.markers) ext.include(m.x, m.y);
  ext.finish();

  auto tx = [&](double x) {
    return ox + ml + (x - ext.x_min) / (ext.x_max - ext.x_min) * pw;
  };
  auto ty = [&](double y) {
    return oy + mt + ph - (y - ext.y_min) / (ext.y_max - ext.y_min) * ph;
  };

  out << "<rect x=\"" << fmt(ox + ml) << "\" y=\"" << fmt(oy + mt) << "\" width=\""
      << fmt(pw) << "\" height=\"" << fmt(ph)
      << "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << fmt(ox + ml + pw / 2) << "\" y=\"" << fmt(oy + 16)
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">"
      << chart.title << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    double fx = ext.x_min + (ext.x_max - ext.x_min) * i / 4.0;
    double fy = ext.y_min + (ext.y_max - ext.y_min) * i / 4.0;
    out << "<text x=\"" << fmt(tx(fx)) << "\" y=\"" << fmt(oy + mt + ph + 14)
        << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
        << fmt_tick(fx) << "</text>\n";
    out << "<text x=\"" << fmt(ox + ml - 4) << "\" y=\"" << fmt(ty(fy) + 3)
        << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">"
        << fmt_tick(fy) << "</text>\n";
  }
  out << "<text x=\"" << fmt(ox + ml + pw / 2) << "\" y=\"" << fmt(oy + mt + ph + 30)
      << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
      << chart.x_label << "</text>\n";
  out << "<text x=\"" << fmt(ox + 12) << "\" y=\"" << fmt(oy + mt + ph / 2)
      << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\""
      << " transform=\"rotate(-90 " << fmt(ox + 12) << ' ' << fmt(oy + mt + ph / 2)
      << ")\">" << chart.y_label << "</text>\n";

  for (const auto& s : chart.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
        << fmt(s.width) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << fmt(tx(s.x[i])) << ',' << fmt(ty(s.y[i]));
    }
    out << "\"/>\n";
  }
  for (const auto& m : chart.markers) {
    out << "<circle cx=\"" << fmt(tx(m.x)) << "\" cy=\"" << fmt(ty(m.y))
        << "\" r=\"4\" fill=\"" << m.color << "\"/>\n";
  }
}

}  // namespace

std::string render_chart(const SvgChart& chart, int width, int height) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  render_chart_into(out, chart, 0, 0, width, height);
  out << "</svg>\n";
  return out.str();
}

std::string render_panel_grid(const std::vector<SvgChart>& charts,
                              int panel_width, int panel_height) {
  int n = static_cast<int>(charts.size());
  int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
  int rows = (n + cols - 1) / cols;
  int width = cols * panel_width;
  int height = rows * panel_height;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < n; ++i) {
    double ox = static_cast<double>(i % cols) * panel_width;
    double oy = static_cast<double>(i / cols) * panel_height;
    render_chart_into(out, charts[static_cast<std::size_t>(i)], ox, oy,
                      panel_width, panel_height);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace agesig
