#include "exacb/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "exacb/csv.hpp"
#include "exacb/errors.hpp"
#include "exacb/protocol.hpp"

namespace exacb {

namespace {

void check_runtime_series(const RuntimeSeries& series) {
  for (size_t i = 0; i < series.points.size(); ++i) {
    if (series.points[i].runtime <= 0.0) {
      throw DomainError("runtime series: runtimes must be > 0");
    }
    if (i > 0 && series.points[i].nodes <= series.points[i - 1].nodes) {
      throw DomainError("runtime series: node counts must strictly increase");
    }
  }
}

void check_trace(const EnergyTrace& trace) {
  for (size_t i = 0; i < trace.samples.size(); ++i) {
    if (i > 0 && !(trace.samples[i].t > trace.samples[i - 1].t)) {
      throw DomainError("energy trace: sample times must strictly increase");
    }
    for (double w : trace.samples[i].watts) {
      if (!(w >= 0.0)) throw DomainError("energy trace: negative power");
    }
  }
  if (trace.window && !trace.samples.empty()) {
    const auto& [w0, w1] = *trace.window;
    if (!(w0 <= w1) || w0 < trace.samples.front().t ||
        w1 > trace.samples.back().t) {
      throw DomainError("energy trace: window outside sample range");
    }
  }
}

double total_watts(const EnergySample& s) {
  double sum = 0.0;
  for (double w : s.watts) sum += w;
  return sum;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Linear interpolation of total power at time t between samples lo and hi.
double lerp_power(const EnergySample& lo, const EnergySample& hi, double t) {
  const double span = hi.t - lo.t;
  if (span <= 0.0) return total_watts(lo);
  const double f = (t - lo.t) / span;
  return total_watts(lo) + f * (total_watts(hi) - total_watts(lo));
}

struct ParsedReport {
  std::string key;
  BenchmarkReport report;
};

std::vector<ParsedReport> fetch_reports(
    const ResultStore& store, const std::string& prefix,
    std::optional<std::pair<UtcSeconds, UtcSeconds>> time_span,
    const std::vector<std::string>& pipelines) {
  std::vector<ParsedReport> out;
  for (const auto& key : list_reports(store, prefix, time_span)) {
    ValidationResult parsed = validate_report_text(get_report(store, key));
    if (!parsed.ok()) continue;
    if (!pipelines.empty() &&
        std::find(pipelines.begin(), pipelines.end(),
                  parsed.report->reporter.pipeline_id) == pipelines.end()) {
      continue;
    }
    out.push_back({key, std::move(*parsed.report)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const auto ta = a.report.experiment.started_at;
    const auto tb = b.report.experiment.started_at;
    return ta != tb ? ta < tb : a.key < b.key;
  });
  return out;
}

}  // namespace

std::vector<ScalingPoint> strong_scaling(const RuntimeSeries& series) {
  check_runtime_series(series);
  std::vector<ScalingPoint> out;
  if (series.points.empty()) return out;
  const double t0 = series.points.front().runtime;
  const double n0 = static_cast<double>(series.points.front().nodes);
  for (const auto& p : series.points) {
    ScalingPoint sp;
    sp.nodes = p.nodes;
    sp.speedup = t0 / p.runtime;
    sp.efficiency = sp.speedup * n0 / static_cast<double>(p.nodes);
    out.push_back(sp);
  }
  return out;
}

std::pair<double, double> scaling_band(long long n0, double t0, double eff,
                                       long long n) {
  if (!(eff > 0.0 && eff <= 1.0)) {
    throw DomainError("scaling_band: efficiency must be in (0, 1]");
  }
  if (n < n0) throw DomainError("scaling_band: n must be >= n0");
  const double ideal =
      t0 * static_cast<double>(n0) / static_cast<double>(n);
  return {ideal, ideal / eff};
}

std::vector<std::pair<long long, double>> weak_scaling_efficiency(
    const RuntimeSeries& series) {
  check_runtime_series(series);
  std::vector<std::pair<long long, double>> out;
  if (series.points.empty()) return out;
  const double t0 = series.points.front().runtime;
  for (const auto& p : series.points) {
    out.emplace_back(p.nodes, t0 / p.runtime);
  }
  return out;
}

std::vector<SelectorSeries> compare_machines(
    const ResultStore& store, const std::vector<std::string>& selectors,
    const std::vector<std::string>& pipelines) {
  if (selectors.empty()) {
    throw DomainError("compare_machines: need at least one selector");
  }
  std::vector<SelectorSeries> table;
  for (const auto& selector : selectors) {
    SelectorSeries row;
    row.selector = selector;
    row.series.label = selector;
    std::map<long long, std::vector<double>> by_nodes;
    for (auto& pr : fetch_reports(store, selector, std::nullopt, pipelines)) {
      ++row.reports;
      for (const auto& entry : pr.report.data) {
        if (!entry.success || entry.runtime <= 0.0) {
          ++row.excluded;
          continue;
        }
        by_nodes[entry.nodes].push_back(entry.runtime);
      }
    }
    for (const auto& [nodes, runtimes] : by_nodes) {
      double sum = 0.0;
      for (double t : runtimes) sum += t;
      row.series.points.push_back(
          {nodes, sum / static_cast<double>(runtimes.size())});
    }
    table.push_back(std::move(row));
  }
  return table;
}

TimeSeriesBundle assemble_timeseries(
    const ResultStore& store, const std::string& prefix,
    const std::vector<std::string>& data_labels,
    std::optional<std::pair<UtcSeconds, UtcSeconds>> time_span,
    const std::vector<std::string>& pipelines) {
  if (data_labels.empty()) {
    throw DomainError("assemble_timeseries: need at least one data label");
  }
  TimeSeriesBundle bundle;
  const auto reports = fetch_reports(store, prefix, time_span, pipelines);
  for (const auto& label : data_labels) {
    TimeSeries ts;
    ts.metric_label = label;
    for (const auto& pr : reports) {
      for (const auto& entry : pr.report.data) {
        std::optional<double> value;
        if (label == "runtime") {
          value = entry.runtime;
        } else if (auto it = entry.metrics.find(label);
                   it != entry.metrics.end()) {
          if (const double* num = std::get_if<double>(&it->second)) {
            value = *num;
          }
        }
        if (value) {
          ts.points.push_back({pr.report.experiment.started_at, *value,
                               pr.report.reporter.pipeline_id});
        }
      }
    }
    if (ts.points.empty()) {
      bundle.warnings.push_back("data label \"" + label +
                                "\" matched no stored values");
    }
    bundle.series.push_back(std::move(ts));
  }
  return bundle;
}

std::vector<RegressionFlag> detect_regressions(const TimeSeries& series,
                                               std::size_t window,
                                               double threshold,
                                               MetricOrientation orientation) {
  if (window < 3) throw DomainError("detect_regressions: window must be >= 3");
  std::vector<RegressionFlag> flags;
  const auto& pts = series.points;
  if (pts.size() <= window) return flags;
  for (size_t i = window; i < pts.size(); ++i) {
    std::vector<double> history;
    history.reserve(window);
    for (size_t j = i - window; j < i; ++j) history.push_back(pts[j].value);
    const double med = median_of(std::move(history));
    if (med == 0.0) continue;  // relative deviation undefined
    const double deviation = (pts[i].value - med) / med;
    if (std::abs(deviation) <= threshold) continue;
    const bool worsened =
        orientation == MetricOrientation::lower_is_better ? deviation > 0.0
                                                          : deviation < 0.0;
    flags.push_back({i, worsened ? FlagDirection::regression
                                 : FlagDirection::recovery});
  }
  return flags;
}

std::pair<double, double> detect_measurement_window(
    const EnergyTrace& trace, double alpha,
    std::optional<std::pair<double, double>> manual_override) {
  check_trace(trace);
  if (manual_override) {
    EnergyTrace check = trace;
    check.window = manual_override;
    check_trace(check);
    return *manual_override;
  }
  if (trace.samples.size() < 3) {
    throw DomainError("window detection needs at least 3 samples");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("window detection: alpha must be in (0, 1]");
  }

  std::vector<double> totals;
  totals.reserve(trace.samples.size());
  for (const auto& s : trace.samples) totals.push_back(total_watts(s));

  std::vector<double> sorted = totals;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() <= 0.0) throw DomainError("no active region");
  // Nearest-rank 95th percentile.
  const size_t rank = static_cast<size_t>(
      std::ceil(0.95 * static_cast<double>(sorted.size())));
  const double p95 = sorted[std::min(rank, sorted.size()) - 1];
  const double cutoff = alpha * p95;

  size_t best_begin = 0, best_len = 0;
  size_t run_begin = 0, run_len = 0;
  for (size_t i = 0; i < totals.size(); ++i) {
    if (totals[i] >= cutoff) {
      if (run_len == 0) run_begin = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_begin = run_begin;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0) throw DomainError("no active region");
  return {trace.samples[best_begin].t,
          trace.samples[best_begin + best_len - 1].t};
}

double energy_to_solution(const EnergyTrace& trace) {
  check_trace(trace);
  if (!trace.window) {
    throw DomainError(
        "no measurement window set; run detect_measurement_window or supply "
        "a manual override");
  }
  const auto& [w0, w1] = *trace.window;
  const auto& samples = trace.samples;
  if (samples.size() < 2 || w1 <= w0) return 0.0;

  double energy = 0.0;
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    const double seg0 = std::max(samples[i].t, w0);
    const double seg1 = std::min(samples[i + 1].t, w1);
    if (seg1 <= seg0) continue;
    const double p0 = lerp_power(samples[i], samples[i + 1], seg0);
    const double p1 = lerp_power(samples[i], samples[i + 1], seg1);
    energy += 0.5 * (p0 + p1) * (seg1 - seg0);
  }
  return energy;
}

SweepPoint sweep_optimum(const std::vector<SweepPoint>& points) {
  if (points.empty()) throw DomainError("sweep_optimum: empty sweep");
  for (size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].frequency > 0.0) || !(points[i].energy > 0.0)) {
      throw DomainError("sweep_optimum: frequency and energy must be > 0");
    }
    for (size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].frequency == points[j].frequency) {
        throw DomainError("sweep_optimum: duplicate frequency");
      }
    }
  }
  const SweepPoint* best = &points.front();
  for (const auto& p : points) {
    if (p.energy < best->energy ||
        (p.energy == best->energy && p.frequency < best->frequency)) {
      best = &p;
    }
  }
  return *best;
}

EnergyTrace energy_trace_from_csv(const CsvTable& table) {
  if (table.header.empty() || table.header.front() != "t_seconds") {
    throw Error("energy trace: first column must be t_seconds");
  }
  if (table.header.size() < 2) {
    throw Error("energy trace: need at least one device column");
  }
  EnergyTrace trace;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    EnergySample sample;
    for (size_t c = 0; c < table.rows[r].size(); ++c) {
      const std::string& cell = table.rows[r][c];
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(value)) {
        throw Error("energy trace: row " + std::to_string(r + 1) +
                    ", column " + table.header[c] + ": not a number: \"" +
                    cell + "\"");
      }
      if (c == 0) {
        sample.t = value;
      } else {
        sample.watts.push_back(value);
      }
    }
    trace.samples.push_back(std::move(sample));
  }
  check_trace(trace);
  return trace;
}

}  // namespace exacb
