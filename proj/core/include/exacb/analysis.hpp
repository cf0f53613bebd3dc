#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exacb/store.hpp"
#include "exacb/timeutil.hpp"

namespace exacb {

struct RuntimePoint {
  long long nodes = 1;
  double runtime = 0.0;  // seconds, > 0

  bool operator==(const RuntimePoint&) const = default;
};

// Runtime against node count for one system/variant; node counts strictly
// increasing.
struct RuntimeSeries {
  std::vector<RuntimePoint> points;
  std::string label;
};

struct TimePoint {
  UtcSeconds timestamp = 0;
  double value = 0.0;
  std::string pipeline_id;
};

struct TimeSeries {
  std::vector<TimePoint> points;  // timestamps non-decreasing
  std::string metric_label;
};

struct EnergySample {
  double t = 0.0;  // seconds from start
  std::vector<double> watts;  // per device
};

struct EnergyTrace {
  std::vector<EnergySample> samples;  // times strictly increasing
  std::optional<std::pair<double, double>> window;
};

struct SweepPoint {
  double frequency = 0.0;  // hertz
  double energy = 0.0;     // joules
  double runtime = 0.0;    // seconds

  bool operator==(const SweepPoint&) const = default;
};

struct ScalingPoint {
  long long nodes = 1;
  double speedup = 1.0;
  double efficiency = 1.0;
};

enum class MetricOrientation { higher_is_better, lower_is_better };

enum class FlagDirection { regression, recovery };

struct RegressionFlag {
  std::size_t index = 0;
  FlagDirection direction = FlagDirection::regression;

  bool operator==(const RegressionFlag&) const = default;
};

// One comparison row per selector.
struct SelectorSeries {
  std::string selector;
  RuntimeSeries series;
  std::size_t reports = 0;   // reports contributing after pipeline filter
  std::size_t excluded = 0;  // entries dropped (success=false or runtime 0)
};

// S(n) = T(n0)/T(n), E(n) = S(n)*n0/n, baseline = smallest measured n0.
std::vector<ScalingPoint> strong_scaling(const RuntimeSeries& series);

// ideal = T0*n0/n; band = ideal/eff. eff must lie in (0, 1].
std::pair<double, double> scaling_band(long long n0, double t0, double eff,
                                       long long n);

// efficiency(n) = T(n0)/T(n) for size-adapted workloads.
std::vector<std::pair<long long, double>> weak_scaling_efficiency(
    const RuntimeSeries& series);

// One RuntimeSeries per selector from the store's matching reports
// (nodes -> n, runtime -> T, sorted by n). Entries with success=false are
// excluded and counted; repeated node counts are averaged. An empty
// pipelines list selects all pipelines.
std::vector<SelectorSeries> compare_machines(
    const ResultStore& store, const std::vector<std::string>& selectors,
    const std::vector<std::string>& pipelines = {});

struct TimeSeriesBundle {
  std::vector<TimeSeries> series;  // one per data label, in label order
  std::vector<std::string> warnings;
};

// Pulls one point per matching (report, entry) carrying the label (metric
// key, or the runtime field when the label is "runtime"), ordered by
// experiment.started_at. Empty pipelines/time_span select everything.
TimeSeriesBundle assemble_timeseries(
    const ResultStore& store, const std::string& prefix,
    const std::vector<std::string>& data_labels,
    std::optional<std::pair<UtcSeconds, UtcSeconds>> time_span = std::nullopt,
    const std::vector<std::string>& pipelines = {});

inline constexpr std::size_t kDefaultRegressionWindow = 7;
inline constexpr double kDefaultRegressionThreshold = 0.1;

// Point i (i >= window) is flagged iff its relative deviation from the
// median of the preceding `window` values exceeds `threshold`. Direction
// depends on the metric orientation. Series shorter than window+1 yield no
// flags; window < 3 is an error.
std::vector<RegressionFlag> detect_regressions(
    const TimeSeries& series, std::size_t window = kDefaultRegressionWindow,
    double threshold = kDefaultRegressionThreshold,
    MetricOrientation orientation = MetricOrientation::lower_is_better);

// Longest contiguous sample run whose total power stays at or above
// alpha * (95th-percentile total power). A manual override wins verbatim.
// The 95th percentile (not the max) keeps spikes from moving the plateau
// reference.
std::pair<double, double> detect_measurement_window(
    const EnergyTrace& trace, double alpha = 0.5,
    std::optional<std::pair<double, double>> manual_override = std::nullopt);

// Trapezoidal integral of total (device-summed) power over the trace's
// measurement window. The window must have been set (detected or manual).
double energy_to_solution(const EnergyTrace& trace);

// The point with minimal energy; ties break toward lower frequency.
SweepPoint sweep_optimum(const std::vector<SweepPoint>& points);

// CSV ingestion per the documented trace format:
// t_seconds,device0_watts,device1_watts,...
EnergyTrace energy_trace_from_csv(const struct CsvTable& table);

}  // namespace exacb
