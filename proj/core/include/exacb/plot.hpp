#pragma once

#include <string>
#include <utility>
#include <vector>

namespace exacb {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;   // guide lines (ideal scaling, bands)
  double scale = 1.0;    // per-series display scaling, applied to y
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool x_as_time = false;  // tick labels become UTC dates
  bool log_x = false;
  bool log_y = false;
  std::vector<double> vlines;  // vertical markers, e.g. measurement window
};

// Static, self-contained SVG. Output is a pure function of the inputs (no
// timestamps), so identical calls yield identical bytes.
std::string render_line_chart(const std::vector<PlotSeries>& series,
                              const PlotOptions& opts);

}  // namespace exacb
