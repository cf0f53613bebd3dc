#include "analyze.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "exacb/analysis.hpp"
#include "exacb/csv.hpp"
#include "exacb/errors.hpp"
#include "exacb/plot.hpp"
#include "exacb/timeutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace exacb::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc = json::parse(ss.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + ": JSON parse error");
  if (!doc.is_object()) throw ConfigError(path + ": expected a JSON object");
  return doc;
}

void reject_unknown(const json& doc, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) ok = true;
    }
    if (!ok) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
  }
}

std::string need_prefix(const json& doc, const std::string& where) {
  auto it = doc.find("prefix");
  if (it == doc.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw ConfigError(where + ": key \"prefix\" (non-empty string) required");
  }
  const std::string prefix = it->get<std::string>();
  // The prefix names output files; it must stay inside the out dir.
  if (prefix.front() == '/' || prefix.find("..") != std::string::npos) {
    throw ConfigError(where + ": prefix must be a relative name without ..");
  }
  return prefix;
}

std::vector<std::string> string_list(const json& doc, const char* key,
                                     const std::string& where) {
  std::vector<std::string> out;
  auto it = doc.find(key);
  if (it == doc.end()) return out;
  if (!it->is_array()) {
    throw ConfigError(where + ": key \"" + std::string(key) +
                      "\" must be an array of strings");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ConfigError(where + ": key \"" + std::string(key) +
                        "\" must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

double number_or(const json& doc, const char* key, double fallback,
                 const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) {
    throw ConfigError(where + ": key \"" + std::string(key) +
                      "\" must be a number");
  }
  return it->get<double>();
}

std::optional<std::pair<UtcSeconds, UtcSeconds>> time_span_of(
    const json& doc, const std::string& where) {
  const auto span = string_list(doc, "time_span", where);
  if (span.empty()) return std::nullopt;
  if (span.size() != 2) {
    throw ConfigError(where + ": time_span needs exactly two entries");
  }
  auto from = parse_utc_or_date(span[0]);
  auto to = parse_utc_or_date(span[1]);
  if (!from || !to) {
    throw ConfigError(where + ": time_span entries must be YYYY-MM-DD or "
                      "YYYY-MM-DDTHH:MM:SSZ");
  }
  return std::make_pair(*from, *to);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << bytes;
  if (!out) throw Error("write failed for " + path);
}

std::string out_path(const ToolContext& ctx, const std::string& prefix,
                     const std::string& suffix) {
  const fs::path path = fs::path(ctx.out_dir) / (prefix + suffix);
  fs::create_directories(path.parent_path());
  return path.string();
}

// --- comparison --------------------------------------------------------------

int analyze_comparison(const json& doc, const std::string& where,
                       const ToolContext& ctx) {
  reject_unknown(doc, {"prefix", "pipeline", "selector", "eff", "scale"},
                 where);
  const std::string prefix = need_prefix(doc, where);
  const auto pipelines = string_list(doc, "pipeline", where);
  const auto selectors = string_list(doc, "selector", where);
  if (selectors.empty()) {
    throw ConfigError(where + ": key \"selector\" must list at least one "
                      "store prefix");
  }
  const double eff = number_or(doc, "eff", 0.8, where);
  std::map<std::string, double> scales;
  if (auto it = doc.find("scale"); it != doc.end()) {
    if (!it->is_object()) {
      throw ConfigError(where + ": key \"scale\" must map selector to factor");
    }
    for (auto s = it->begin(); s != it->end(); ++s) {
      if (!s->is_number()) {
        throw ConfigError(where + ": scale for \"" + s.key() +
                          "\" must be a number");
      }
      scales[s.key()] = s->get<double>();
    }
  }

  const ResultStore store = ctx.resolve_store();
  const auto table = compare_machines(store, selectors, pipelines);

  CsvTable out;
  out.header = {"selector", "nodes",      "runtime_seconds", "speedup",
                "efficiency", "ideal_runtime", "band_runtime"};
  std::vector<PlotSeries> series;
  bool any_points = false;
  for (const auto& row : table) {
    if (row.series.points.empty()) {
      std::cerr << "warning: selector \"" << row.selector
                << "\" matched no successful entries\n";
    }
    if (row.excluded > 0) {
      std::cerr << "warning: selector \"" << row.selector << "\": "
                << row.excluded << " failed/zero-runtime entries excluded\n";
    }
    const auto scaling = strong_scaling(row.series);
    const double display_scale =
        scales.count(row.selector) ? scales.at(row.selector) : 1.0;

    PlotSeries ps;
    ps.label = row.selector;
    if (display_scale != 1.0) ps.label += " (x" + fmt(display_scale) + ")";
    ps.scale = display_scale;

    PlotSeries ideal{row.selector + " ideal", {}, true, display_scale};
    PlotSeries band{row.selector + " " + fmt(eff * 100) + "% band",
                    {},
                    true,
                    display_scale};
    const bool have_base = !row.series.points.empty();
    const long long n0 = have_base ? row.series.points.front().nodes : 1;
    const double t0 = have_base ? row.series.points.front().runtime : 0.0;

    for (size_t i = 0; i < row.series.points.size(); ++i) {
      const auto& p = row.series.points[i];
      const auto [ideal_rt, band_rt] = scaling_band(n0, t0, eff, p.nodes);
      out.rows.push_back({row.selector, std::to_string(p.nodes),
                          fmt(p.runtime), fmt(scaling[i].speedup),
                          fmt(scaling[i].efficiency), fmt(ideal_rt),
                          fmt(band_rt)});
      ps.points.emplace_back(static_cast<double>(p.nodes), p.runtime);
      ideal.points.emplace_back(static_cast<double>(p.nodes), ideal_rt);
      band.points.emplace_back(static_cast<double>(p.nodes), band_rt);
      any_points = true;
    }
    series.push_back(std::move(ps));
    if (have_base && row.series.points.size() > 1) {
      series.push_back(std::move(ideal));
      series.push_back(std::move(band));
    }
  }

  PlotOptions popts;
  popts.title = prefix + ": runtime vs nodes";
  popts.xlabel = "nodes";
  popts.ylabel = "runtime / s";
  popts.log_x = true;
  popts.log_y = true;

  write_file(out_path(ctx, prefix, ".comparison.csv"), to_csv(out));
  write_file(out_path(ctx, prefix, ".comparison.svg"),
             render_line_chart(series, popts));
  if (!any_points) std::cerr << "warning: empty selection, no data plotted\n";
  return kExitOk;
}

// --- timeseries ----------------------------------------------------------------

int analyze_timeseries(const json& doc, const std::string& where,
                       const ToolContext& ctx) {
  reject_unknown(doc,
                 {"prefix", "pipeline", "data_labels", "ylabel", "plot_labels",
                  "time_span", "window", "threshold"},
                 where);
  const std::string prefix = need_prefix(doc, where);
  const auto pipelines = string_list(doc, "pipeline", where);
  const auto labels = string_list(doc, "data_labels", where);
  if (labels.empty()) {
    throw ConfigError(where + ": key \"data_labels\" must list at least one "
                      "label");
  }
  auto plot_labels = string_list(doc, "plot_labels", where);
  if (plot_labels.empty()) plot_labels = labels;
  if (plot_labels.size() != labels.size()) {
    throw ConfigError(where + ": plot_labels must match data_labels length");
  }
  std::string ylabel = "value";
  if (auto it = doc.find("ylabel"); it != doc.end()) {
    if (it->is_string()) {
      ylabel = it->get<std::string>();
    } else if (it->is_array() && !it->empty() && (*it)[0].is_string()) {
      ylabel = (*it)[0].get<std::string>();
    } else {
      throw ConfigError(where + ": ylabel must be a string or [string]");
    }
  }
  const auto span = time_span_of(doc, where);
  const auto window = static_cast<std::size_t>(
      number_or(doc, "window", kDefaultRegressionWindow, where));
  const double threshold =
      number_or(doc, "threshold", kDefaultRegressionThreshold, where);

  const ResultStore store = ctx.resolve_store();
  const auto bundle = assemble_timeseries(store, prefix, labels, span,
                                          pipelines);
  for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";

  CsvTable summary;
  summary.header = {"data_label", "points", "first",       "last",
                    "min",        "max",    "mean",        "regressions",
                    "recoveries"};
  CsvTable detail;
  detail.header = {"data_label", "index",     "timestamp",
                   "pipeline_id", "value",    "direction"};
  std::vector<PlotSeries> series;

  for (size_t i = 0; i < bundle.series.size(); ++i) {
    const TimeSeries& ts = bundle.series[i];
    const auto flags = detect_regressions(ts, window, threshold,
                                          ctx.config.orientation_for(ts.metric_label));
    size_t regressions = 0;
    for (const auto& f : flags) {
      if (f.direction == FlagDirection::regression) ++regressions;
      const auto& p = ts.points[f.index];
      detail.rows.push_back(
          {ts.metric_label, std::to_string(f.index), format_utc(p.timestamp),
           p.pipeline_id, fmt(p.value),
           f.direction == FlagDirection::regression ? "regression"
                                                    : "recovery"});
    }

    PlotSeries ps;
    ps.label = plot_labels[i];
    double vmin = 0, vmax = 0, sum = 0;
    for (size_t p = 0; p < ts.points.size(); ++p) {
      const double v = ts.points[p].value;
      ps.points.emplace_back(static_cast<double>(ts.points[p].timestamp), v);
      vmin = p == 0 ? v : std::min(vmin, v);
      vmax = p == 0 ? v : std::max(vmax, v);
      sum += v;
    }
    series.push_back(std::move(ps));

    if (ts.points.empty()) {
      summary.rows.push_back(
          {ts.metric_label, "0", "", "", "", "", "", "0", "0"});
    } else {
      summary.rows.push_back(
          {ts.metric_label, std::to_string(ts.points.size()),
           format_utc(ts.points.front().timestamp),
           format_utc(ts.points.back().timestamp), fmt(vmin), fmt(vmax),
           fmt(sum / static_cast<double>(ts.points.size())),
           std::to_string(regressions),
           std::to_string(flags.size() - regressions)});
    }
  }

  PlotOptions popts;
  popts.title = prefix + ": metrics over time";
  popts.xlabel = "date";
  popts.ylabel = ylabel;
  popts.x_as_time = true;

  write_file(out_path(ctx, prefix, ".timeseries.csv"), to_csv(summary));
  write_file(out_path(ctx, prefix, ".regressions.csv"), to_csv(detail));
  write_file(out_path(ctx, prefix, ".timeseries.svg"),
             render_line_chart(series, popts));
  return kExitOk;
}

// --- scaling -------------------------------------------------------------------

int analyze_scaling(const json& doc, const std::string& where,
                    const ToolContext& ctx) {
  reject_unknown(doc, {"prefix", "pipeline", "selector", "mode"}, where);
  const std::string prefix = need_prefix(doc, where);
  const auto pipelines = string_list(doc, "pipeline", where);
  auto selectors = string_list(doc, "selector", where);
  if (selectors.empty()) selectors = {prefix};
  std::string mode = "strong";
  if (auto it = doc.find("mode"); it != doc.end()) {
    if (!it->is_string() ||
        (it->get<std::string>() != "strong" &&
         it->get<std::string>() != "weak")) {
      throw ConfigError(where + ": mode must be \"strong\" or \"weak\"");
    }
    mode = it->get<std::string>();
  }

  const ResultStore store = ctx.resolve_store();
  const auto table = compare_machines(store, selectors, pipelines);

  CsvTable out;
  out.header = {"selector", "nodes", "runtime_seconds", "efficiency"};
  if (mode == "strong") out.header.insert(out.header.begin() + 3, "speedup");
  std::vector<PlotSeries> series;
  for (const auto& row : table) {
    if (row.series.points.empty()) {
      std::cerr << "warning: selector \"" << row.selector
                << "\" matched no successful entries\n";
    }
    PlotSeries ps;
    ps.label = row.selector;
    if (mode == "strong") {
      const auto scaling = strong_scaling(row.series);
      for (size_t i = 0; i < scaling.size(); ++i) {
        out.rows.push_back({row.selector, std::to_string(scaling[i].nodes),
                            fmt(row.series.points[i].runtime),
                            fmt(scaling[i].speedup),
                            fmt(scaling[i].efficiency)});
        ps.points.emplace_back(static_cast<double>(scaling[i].nodes),
                               scaling[i].efficiency);
      }
    } else {
      const auto weak = weak_scaling_efficiency(row.series);
      for (size_t i = 0; i < weak.size(); ++i) {
        out.rows.push_back({row.selector, std::to_string(weak[i].first),
                            fmt(row.series.points[i].runtime),
                            fmt(weak[i].second)});
        ps.points.emplace_back(static_cast<double>(weak[i].first),
                               weak[i].second);
      }
    }
    series.push_back(std::move(ps));
  }

  PlotOptions popts;
  popts.title = prefix + ": " + mode + "-scaling efficiency";
  popts.xlabel = "nodes";
  popts.ylabel = "efficiency";
  popts.log_x = true;

  write_file(out_path(ctx, prefix, ".scaling.csv"), to_csv(out));
  write_file(out_path(ctx, prefix, ".scaling.svg"),
             render_line_chart(series, popts));
  return kExitOk;
}

// --- energy --------------------------------------------------------------------

int analyze_energy(const json& doc, const std::string& where,
                   const ToolContext& ctx) {
  reject_unknown(doc, {"prefix", "trace", "alpha", "window", "sweep"}, where);
  const std::string prefix = need_prefix(doc, where);
  const double alpha = number_or(doc, "alpha", 0.5, where);

  std::optional<std::pair<double, double>> manual;
  if (auto it = doc.find("window"); it != doc.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
        !(*it)[1].is_number()) {
      throw ConfigError(where + ": window must be [t_start, t_end]");
    }
    manual = std::make_pair((*it)[0].get<double>(), (*it)[1].get<double>());
  }

  const std::string trace_path = [&]() -> std::string {
    auto it = doc.find("trace");
    if (it == doc.end()) return {};
    if (!it->is_string()) {
      throw ConfigError(where + ": trace must be a CSV path");
    }
    return it->get<std::string>();
  }();

  struct SweepEntry {
    double frequency;
    std::string trace;
  };
  std::vector<SweepEntry> sweep_entries;
  if (auto it = doc.find("sweep"); it != doc.end()) {
    if (!it->is_array()) {
      throw ConfigError(where + ": sweep must be an array");
    }
    for (const auto& e : *it) {
      if (!e.is_object()) {
        throw ConfigError(where + ": sweep entries must be objects");
      }
      reject_unknown(e, {"frequency", "trace"}, where + ": sweep entry");
      if (!e.contains("frequency") || !e["frequency"].is_number() ||
          !e.contains("trace") || !e["trace"].is_string()) {
        throw ConfigError(where +
                          ": sweep entries need frequency (Hz) and trace");
      }
      sweep_entries.push_back(
          {e["frequency"].get<double>(), e["trace"].get<std::string>()});
    }
  }
  if (trace_path.empty() && sweep_entries.empty()) {
    throw ConfigError(where + ": need \"trace\" or \"sweep\"");
  }

  // The detected window systematically under-reports the total draw, so the
  // table always carries the full-trace figure next to the windowed one.
  auto analyze_one = [&](const std::string& path) {
    EnergyTrace trace = energy_trace_from_csv(read_csv_file(path));
    const auto window = detect_measurement_window(trace, alpha, manual);
    trace.window = window;
    const double windowed = energy_to_solution(trace);
    EnergyTrace full = trace;
    full.window = {full.samples.front().t, full.samples.back().t};
    const double total = energy_to_solution(full);
    return std::tuple<EnergyTrace, std::pair<double, double>, double, double>(
        std::move(trace), window, windowed, total);
  };

  CsvTable out;
  out.header = {"trace",          "window_start", "window_end",
                "windowed_joules", "full_joules",  "window_seconds"};

  if (!trace_path.empty()) {
    auto [trace, window, windowed, total] = analyze_one(trace_path);
    out.rows.push_back({trace_path, fmt(window.first), fmt(window.second),
                        fmt(windowed), fmt(total),
                        fmt(window.second - window.first)});

    std::vector<PlotSeries> series;
    const size_t devices =
        trace.samples.empty() ? 0 : trace.samples.front().watts.size();
    for (size_t d = 0; d < devices; ++d) {
      PlotSeries ps;
      ps.label = "device" + std::to_string(d);
      for (const auto& s : trace.samples) {
        ps.points.emplace_back(s.t, d < s.watts.size() ? s.watts[d] : 0.0);
      }
      series.push_back(std::move(ps));
    }
    PlotOptions popts;
    popts.title = prefix + ": power trace";
    popts.xlabel = "time / s";
    popts.ylabel = "power / W";
    popts.vlines = {window.first, window.second};
    write_file(out_path(ctx, prefix, ".energy.svg"),
               render_line_chart(series, popts));
  }

  if (!sweep_entries.empty()) {
    std::vector<SweepPoint> points;
    for (const auto& entry : sweep_entries) {
      auto [trace, window, windowed, total] = analyze_one(entry.trace);
      (void)trace;
      (void)total;
      points.push_back(
          {entry.frequency, windowed, window.second - window.first});
      out.rows.push_back({entry.trace, fmt(window.first), fmt(window.second),
                          fmt(windowed), fmt(total),
                          fmt(window.second - window.first)});
    }
    const SweepPoint best = sweep_optimum(points);

    CsvTable sweep_table;
    sweep_table.header = {"frequency_hz", "energy_joules", "runtime_seconds",
                          "optimum"};
    PlotSeries ps;
    ps.label = "energy";
    for (const auto& p : points) {
      sweep_table.rows.push_back({fmt(p.frequency), fmt(p.energy),
                                  fmt(p.runtime),
                                  p == best ? "true" : "false"});
      ps.points.emplace_back(p.frequency, p.energy);
    }
    PlotOptions popts;
    popts.title = prefix + ": energy vs frequency";
    popts.xlabel = "frequency / Hz";
    popts.ylabel = "energy / J";
    write_file(out_path(ctx, prefix, ".sweep.csv"), to_csv(sweep_table));
    write_file(out_path(ctx, prefix, ".sweep.svg"),
               render_line_chart({ps}, popts));
  }

  write_file(out_path(ctx, prefix, ".energy.csv"), to_csv(out));
  return kExitOk;
}

}  // namespace

int cmd_analyze(const std::string& kind, const std::string& config_path,
                const ToolContext& ctx) {
  const json doc = load_config(config_path);
  if (kind == "comparison") return analyze_comparison(doc, config_path, ctx);
  if (kind == "timeseries") return analyze_timeseries(doc, config_path, ctx);
  if (kind == "scaling") return analyze_scaling(doc, config_path, ctx);
  if (kind == "energy") return analyze_energy(doc, config_path, ctx);
  throw ConfigError("unknown analysis kind \"" + kind +
                    "\" (expected comparison, timeseries, scaling or energy)");
}

}  // namespace exacb::cli
