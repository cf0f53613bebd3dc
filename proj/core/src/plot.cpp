#include "exacb/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "exacb/timeutil.hpp"

namespace exacb {

namespace {

constexpr double kWidth = 960, kHeight = 540;
constexpr double kLeft = 78, kRight = 30, kTop = 46, kBottom = 64;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b",
                                    "#17becf", "#7f7f7f"};
constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double to_unit(double v) const {
    if (log) {
      return (std::log10(v) - std::log10(lo)) /
             (std::log10(hi) - std::log10(lo));
    }
    return (v - lo) / (hi - lo);
  }
};

// 1/2/5 * 10^k tick steps.
std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
  std::vector<double> ticks;
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + step * 1e-9; v += step) {
    ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int e0 = static_cast<int>(std::floor(std::log10(lo)));
  const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
  for (int e = e0; e <= e1; ++e) {
    const double v = std::pow(10.0, e);
    if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) ticks.push_back(v);
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

std::string tick_label(double v, bool as_time) {
  if (as_time) {
    const std::string full = format_utc(static_cast<UtcSeconds>(v));
    return full.substr(0, 10);  // YYYY-MM-DD
  }
  return fmt(v, "%g");
}

}  // namespace

std::string render_line_chart(const std::vector<PlotSeries>& series,
                              const PlotOptions& opts) {
  // Collect the data range across all series (after display scaling).
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      const double ys = y * s.scale;
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = ys;
        any = true;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, ys);
        ymax = std::max(ymax, ys);
      }
    }
  }
  for (double v : opts.vlines) {
    if (any) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
  }

  Axis xaxis, yaxis;
  xaxis.log = opts.log_x && any && xmin > 0.0;
  yaxis.log = opts.log_y && any && ymin > 0.0;
  if (xaxis.log) {
    xaxis.lo = xmin / 1.2;
    xaxis.hi = xmax * 1.2;
  } else {
    double pad = (xmax - xmin) * 0.05;
    if (pad <= 0.0) pad = xmax != 0.0 ? std::abs(xmax) * 0.1 : 1.0;
    xaxis.lo = xmin - pad;
    xaxis.hi = xmax + pad;
  }
  if (yaxis.log) {
    yaxis.lo = ymin / 1.5;
    yaxis.hi = ymax * 1.5;
  } else {
    double pad = (ymax - ymin) * 0.08;
    if (pad <= 0.0) pad = ymax != 0.0 ? std::abs(ymax) * 0.1 : 1.0;
    yaxis.lo = ymin - pad;
    yaxis.hi = ymax + pad;
    if (ymin >= 0.0 && yaxis.lo < 0.0) yaxis.lo = 0.0;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + xaxis.to_unit(v) * plot_w; };
  auto py = [&](double v) { return kTop + (1.0 - yaxis.to_unit(v)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"17\">"
      << escape_xml(opts.title) << "</text>\n";

  // Grid and ticks.
  const auto xticks = xaxis.log ? log_ticks(xaxis.lo, xaxis.hi)
                                : linear_ticks(xaxis.lo, xaxis.hi);
  const auto yticks = yaxis.log ? log_ticks(yaxis.lo, yaxis.hi)
                                : linear_ticks(yaxis.lo, yaxis.hi);
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (double t : xticks) {
    const double x = px(t);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
        << fmt(x) << "\" y2=\"" << fmt(kTop + plot_h)
        << "\" stroke=\"#e4e4e4\"/>\n";
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">"
        << escape_xml(tick_label(t, opts.x_as_time)) << "</text>\n";
  }
  for (double t : yticks) {
    const double y = py(t);
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(y)
        << "\" stroke=\"#e4e4e4\"/>\n";
    svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\">" << escape_xml(tick_label(t, false))
        << "</text>\n";
  }
  svg << "</g>\n";

  // Frame and axis labels.
  svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
      << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << escape_xml(opts.xlabel) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" transform=\"rotate(-90 20 "
      << kTop + plot_h / 2 << ")\">" << escape_xml(opts.ylabel)
      << "</text>\n";

  for (double v : opts.vlines) {
    svg << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
        << fmt(px(v)) << "\" y2=\"" << fmt(kTop + plot_h)
        << "\" stroke=\"black\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"2,2\"/>\n";
  }

  if (!any) {
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#777\">no data</text>\n";
  }

  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.points.empty()) continue;
    const char* color = kPalette[i % kPaletteSize];
    std::ostringstream path;
    for (size_t p = 0; p < s.points.size(); ++p) {
      path << (p == 0 ? "" : " ") << fmt(px(s.points[p].first)) << ","
           << fmt(py(s.points[p].second * s.scale));
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\""
        << path.str() << "\"/>\n";
    if (!s.dashed) {
      for (const auto& [x, y] : s.points) {
        svg << "<circle cx=\"" << fmt(px(x)) << "\" cy=\""
            << fmt(py(y * s.scale)) << "\" r=\"2.6\" fill=\"" << color
            << "\"/>\n";
      }
    }
  }

  // Legend, top-right inside the frame.
  double ly = kTop + 16;
  for (size_t i = 0; i < series.size(); ++i) {
    if (series[i].label.empty()) continue;
    const char* color = kPalette[i % kPaletteSize];
    const double lx = kLeft + plot_w - 250;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(lx + 24) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\""
        << (series[i].dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    svg << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(series[i].label) << "</text>\n";
    ly += 17;
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace exacb
