#include "exacb/plot.hpp"

#include "doctest.h"

using namespace exacb;

namespace {

size_t count_occurrences(const std::string& haystack,
                         const std::string& needle) {
  size_t count = 0, pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("chart output is deterministic and well-formed") {
  PlotSeries s1{"runtime", {{1, 100}, {2, 62.5}, {4, 40}}, false, 1.0};
  PlotSeries s2{"ideal", {{1, 100}, {2, 50}, {4, 25}}, true, 1.0};
  PlotOptions opts;
  opts.title = "runtime vs nodes";
  opts.xlabel = "nodes";
  opts.ylabel = "runtime / s";

  const std::string a = render_line_chart({s1, s2}, opts);
  const std::string b = render_line_chart({s1, s2}, opts);
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>\n") == a.size() - 7);
  CHECK(count_occurrences(a, "<polyline") == 2);
  CHECK(a.find("runtime vs nodes") != std::string::npos);
  CHECK(a.find("stroke-dasharray=\"6,4\"") != std::string::npos);
  // Markers only for solid series: 3 points.
  CHECK(count_occurrences(a, "<circle") == 3);
}

TEST_CASE("labels are XML-escaped") {
  PlotSeries s{"Copy BW  [MBytes/sec] <&>", {{0, 1}, {1, 2}}, false, 1.0};
  PlotOptions opts;
  opts.ylabel = "a < b & c";
  const std::string svg = render_line_chart({s}, opts);
  CHECK(svg.find("&lt;&amp;&gt;") != std::string::npos);
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.find("<&>") == std::string::npos);
}

TEST_CASE("empty input renders a no-data placeholder") {
  const std::string svg = render_line_chart({}, PlotOptions{});
  CHECK(svg.find("no data") != std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
}

TEST_CASE("vertical markers and time ticks") {
  PlotSeries s{"power", {{0, 100}, {10, 100}}, false, 1.0};
  PlotOptions opts;
  opts.vlines = {2.0, 8.0};
  const std::string svg = render_line_chart({s}, opts);
  CHECK(count_occurrences(svg, "stroke-dasharray=\"2,2\"") == 2);

  PlotSeries t{"bw", {{1767225600.0, 1.0}, {1767398400.0, 2.0}}, false, 1.0};
  PlotOptions topts;
  topts.x_as_time = true;
  const std::string tsvg = render_line_chart({t}, topts);
  CHECK(tsvg.find("2026-01-") != std::string::npos);
}

TEST_CASE("per-series display scaling applies to y values") {
  PlotSeries raw{"a", {{1, 100}}, false, 1.0};
  PlotSeries halved{"a", {{1, 200}}, false, 0.5};
  PlotOptions opts;
  // Same effective geometry: identical output modulo nothing else differing.
  CHECK(render_line_chart({raw}, opts) == render_line_chart({halved}, opts));
}
