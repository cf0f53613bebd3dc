#include "exacb/analysis.hpp"

#include <cmath>

#include "doctest.h"
#include "exacb/csv.hpp"
#include "exacb/errors.hpp"
#include "exacb/protocol.hpp"
#include "support/test_util.hpp"

using namespace exacb;

namespace {

RuntimeSeries series_of(std::vector<std::pair<long long, double>> pts,
                        std::string label = "s") {
  RuntimeSeries s;
  s.label = std::move(label);
  for (auto [n, t] : pts) s.points.push_back({n, t});
  return s;
}

TimeSeries values_series(const std::vector<double>& values) {
  TimeSeries ts;
  ts.metric_label = "v";
  for (size_t i = 0; i < values.size(); ++i) {
    ts.points.push_back({static_cast<UtcSeconds>(1767225600 + 3600 * i),
                         values[i], "p"});
  }
  return ts;
}

EnergyTrace trace_of(double dt, const std::vector<double>& totals) {
  EnergyTrace tr;
  for (size_t i = 0; i < totals.size(); ++i) {
    tr.samples.push_back({dt * static_cast<double>(i), {totals[i]}});
  }
  return tr;
}

// Brute-force oracle: scan every contiguous interval and keep the longest
// one whose samples all clear the cutoff.
std::pair<double, double> window_oracle(const EnergyTrace& tr, double alpha) {
  std::vector<double> totals;
  for (const auto& s : tr.samples) {
    double sum = 0;
    for (double w : s.watts) sum += w;
    totals.push_back(sum);
  }
  std::vector<double> sorted = totals;
  std::sort(sorted.begin(), sorted.end());
  const size_t rank =
      static_cast<size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  const double cutoff = alpha * sorted[std::min(rank, sorted.size()) - 1];

  size_t best_i = 0, best_j = 0;
  bool found = false;
  for (size_t i = 0; i < totals.size(); ++i) {
    for (size_t j = i; j < totals.size(); ++j) {
      bool all = true;
      for (size_t k = i; k <= j; ++k) all = all && totals[k] >= cutoff;
      if (all && (!found || j - i > best_j - best_i)) {
        best_i = i;
        best_j = j;
        found = true;
      }
    }
  }
  REQUIRE(found);
  return {tr.samples[best_i].t, tr.samples[best_j].t};
}

}  // namespace

TEST_CASE("strong scaling arithmetic") {
  const auto out = strong_scaling(series_of({{1, 100.0}, {2, 62.5}}));
  REQUIRE(out.size() == 2);
  CHECK(out[0].speedup == 1.0);
  CHECK(out[0].efficiency == 1.0);
  CHECK(out[1].speedup == 1.6);
  CHECK(out[1].efficiency == 0.8);

  SUBCASE("single point baseline identity") {
    const auto one = strong_scaling(series_of({{1, 100.0}}));
    REQUIRE(one.size() == 1);
    CHECK(one[0].speedup == 1.0);
    CHECK(one[0].efficiency == 1.0);
  }
  SUBCASE("non-unit baseline") {
    const auto two = strong_scaling(series_of({{2, 100.0}, {4, 50.0}}));
    CHECK(two[1].speedup == 2.0);
    CHECK(two[1].efficiency == 1.0);
  }
  SUBCASE("baseline efficiency is always exactly 1") {
    test::ReportGen gen(5);
    for (int i = 0; i < 20; ++i) {
      const auto s = strong_scaling(series_of(
          {{static_cast<long long>(1 + gen.rng()() % 8), gen.positive_real()}}));
      CHECK(s[0].efficiency == 1.0);
    }
  }
  SUBCASE("perfect scaling gives E(n)=1 within 1e-12 up to 1024") {
    RuntimeSeries s;
    s.label = "perfect";
    const double t0 = 100.0;
    for (long long n = 1; n <= 1024; n *= 2) {
      s.points.push_back({n, t0 * 1.0 / static_cast<double>(n)});
    }
    for (const auto& p : strong_scaling(s)) {
      CHECK(std::abs(p.efficiency - 1.0) < 1e-12);
    }
  }
  SUBCASE("invariant violations throw") {
    CHECK_THROWS_AS(strong_scaling(series_of({{2, 10.0}, {2, 5.0}})),
                    DomainError);
    CHECK_THROWS_AS(strong_scaling(series_of({{1, 0.0}})), DomainError);
  }
}

TEST_CASE("scaling band formula") {
  CHECK(scaling_band(1, 100.0, 0.8, 4) == std::pair<double, double>{25.0, 31.25});
  CHECK(scaling_band(1, 100.0, 1.0, 2) == std::pair<double, double>{50.0, 50.0});
  CHECK(scaling_band(2, 60.0, 0.8, 8) == std::pair<double, double>{15.0, 18.75});

  SUBCASE("band never undercuts ideal, equality only at eff=1") {
    test::ReportGen gen(6);
    for (int i = 0; i < 50; ++i) {
      const double eff = 0.05 + 0.95 * static_cast<double>(gen.rng()() % 100) / 100.0;
      const long long n0 = 1 + static_cast<long long>(gen.rng()() % 4);
      const long long n = n0 + static_cast<long long>(gen.rng()() % 64);
      const auto [ideal, band] = scaling_band(n0, gen.positive_real(), eff, n);
      CHECK(band >= ideal);
      if (eff < 1.0) CHECK(band > ideal);
    }
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(scaling_band(1, 100.0, 0.0, 2), DomainError);
    CHECK_THROWS_AS(scaling_band(1, 100.0, 1.5, 2), DomainError);
    CHECK_THROWS_AS(scaling_band(4, 100.0, 0.8, 2), DomainError);
  }
}

TEST_CASE("weak scaling efficiency") {
  const auto flat = weak_scaling_efficiency(series_of({{1, 100.0}, {8, 100.0}}));
  CHECK(flat == std::vector<std::pair<long long, double>>{{1, 1.0}, {8, 1.0}});
  const auto droop = weak_scaling_efficiency(series_of({{1, 100.0}, {4, 125.0}}));
  CHECK(droop[1].second == 0.8);
  const auto single = weak_scaling_efficiency(series_of({{3, 42.0}}));
  CHECK(single == std::vector<std::pair<long long, double>>{{3, 1.0}});
}

TEST_CASE("compare_machines builds one series per selector") {
  test::TempDir dir;
  const ResultStore store = open_store("fs:" + dir.sub("store"));

  auto seed = [&](const std::string& selector, long long nodes, double runtime,
                  bool success, const std::string& pipeline) {
    Reporter rep = test::make_reporter();
    rep.pipeline_id = pipeline;
    rep.job_id = selector + std::to_string(nodes);
    BenchmarkReport r = new_report(rep, test::make_experiment());
    r.data.push_back(test::make_entry(nodes, runtime, success));
    put_report(store, selector + "/" + pipeline + "/" + rep.job_id + ".json",
               serialize_report(r));
  };
  for (long long n : {1, 2, 4}) {
    seed("jedi.evaluation.jedi", n, 100.0 / static_cast<double>(n), true,
         "221622");
    seed("jedi.evaluation.jureca", n, 200.0 / static_cast<double>(n), true,
         "221622");
  }
  seed("jedi.evaluation.jedi", 8, 5.0, false, "221622");  // excluded

  const auto table = compare_machines(
      store, {"jedi.evaluation.jedi", "jedi.evaluation.jureca"}, {"221622"});
  REQUIRE(table.size() == 2);
  CHECK(table[0].series.points.size() == 3);
  CHECK(table[1].series.points.size() == 3);
  CHECK(table[0].excluded == 1);
  CHECK(table[1].excluded == 0);
  CHECK(table[0].series.points[0].nodes == 1);
  CHECK(table[0].series.points[2].nodes == 4);
  CHECK(table[0].series.points[2].runtime == 25.0);

  SUBCASE("selector matching nothing yields an empty series") {
    const auto empty = compare_machines(store, {"ghost"}, {});
    REQUIRE(empty.size() == 1);
    CHECK(empty[0].series.points.empty());
    CHECK(empty[0].reports == 0);
  }
  SUBCASE("pipeline filter drops other pipelines") {
    seed("jedi.evaluation.jedi", 16, 4.0, true, "999999");
    const auto filtered =
        compare_machines(store, {"jedi.evaluation.jedi"}, {"221622"});
    CHECK(filtered[0].series.points.size() == 3);
    const auto all = compare_machines(store, {"jedi.evaluation.jedi"}, {});
    CHECK(all[0].series.points.size() == 4);
  }
  SUBCASE("repeated node counts are averaged") {
    seed("dup", 2, 10.0, true, "1");
    seed("dup", 2, 20.0, true, "2");
    const auto avg = compare_machines(store, {"dup"}, {});
    REQUIRE(avg[0].series.points.size() == 1);
    CHECK(avg[0].series.points[0].runtime == 15.0);
  }
  SUBCASE("no selectors is a domain error") {
    CHECK_THROWS_AS(compare_machines(store, {}, {}), DomainError);
  }
}

TEST_CASE("assemble_timeseries pulls labeled metrics in time order") {
  test::TempDir dir;
  const ResultStore store = open_store("fs:" + dir.sub("store"));
  const std::string label = "Copy BW  [MBytes/sec]";

  for (int i = 0; i < 5; ++i) {
    Reporter rep = test::make_reporter();
    rep.pipeline_id = std::to_string(1000 + i);
    Experiment exp = test::make_experiment();
    // Seed out of key order to prove started_at ordering.
    exp.started_at = 1767225600 + 86400 * ((i * 3) % 5);
    BenchmarkReport r = new_report(rep, exp);
    DataEntry e = test::make_entry();
    e.metrics[label] = 1000.0 + i;
    r.data.push_back(e);
    put_report(store, "stream/" + std::to_string(i) + ".json",
               serialize_report(r));
  }

  const auto bundle = assemble_timeseries(store, "stream/", {label});
  REQUIRE(bundle.series.size() == 1);
  const TimeSeries& ts = bundle.series[0];
  REQUIRE(ts.points.size() == 5);
  for (size_t i = 1; i < ts.points.size(); ++i) {
    CHECK(ts.points[i - 1].timestamp <= ts.points[i].timestamp);
  }
  CHECK(bundle.warnings.empty());

  SUBCASE("completeness against list_reports") {
    CHECK(ts.points.size() == list_reports(store, "stream/").size());
  }
  SUBCASE("time span excludes outside points") {
    const auto span = std::make_pair(*parse_utc_or_date("2026-01-01"),
                                     *parse_utc_or_date("2026-01-03"));
    const auto filtered =
        assemble_timeseries(store, "stream/", {label}, span);
    CHECK(filtered.series[0].points.size() < 5);
    for (const auto& p : filtered.series[0].points) {
      CHECK(p.timestamp >= span.first);
      CHECK(p.timestamp <= span.second);
    }
  }
  SUBCASE("unknown label warns by name") {
    const auto missing = assemble_timeseries(store, "stream/", {"ghost"});
    CHECK(missing.series[0].points.empty());
    REQUIRE(missing.warnings.size() == 1);
    CHECK(missing.warnings[0].find("ghost") != std::string::npos);
  }
  SUBCASE("runtime pseudo-label reads the runtime field") {
    const auto rt = assemble_timeseries(store, "stream/", {"runtime"});
    REQUIRE(rt.series[0].points.size() == 5);
    CHECK(rt.series[0].points[0].value == 12.5);
  }
  SUBCASE("empty labels are a domain error") {
    CHECK_THROWS_AS(assemble_timeseries(store, "stream/", {}), DomainError);
  }
}

TEST_CASE("regression detection against a rolling-median oracle") {
  SUBCASE("constant series yields no flags") {
    const auto flags = detect_regressions(values_series(
        std::vector<double>(10, 100.0)), 7, 0.1);
    CHECK(flags.empty());
  }
  SUBCASE("step of +30% is flagged at the step index") {
    std::vector<double> values(5, 100.0);
    values.insert(values.end(), 5, 130.0);
    const auto flags = detect_regressions(values_series(values), 3, 0.1,
                                          MetricOrientation::lower_is_better);
    REQUIRE_FALSE(flags.empty());
    CHECK(flags[0].index == 5);
    CHECK(flags[0].direction == FlagDirection::regression);
  }
  SUBCASE("higher-is-better flips the direction") {
    std::vector<double> values(5, 100.0);
    values.insert(values.end(), 5, 130.0);
    const auto flags = detect_regressions(values_series(values), 3, 0.1,
                                          MetricOrientation::higher_is_better);
    REQUIRE_FALSE(flags.empty());
    CHECK(flags[0].direction == FlagDirection::recovery);
  }
  SUBCASE("flag set is invariant under positive scaling") {
    test::ReportGen gen(11);
    std::vector<double> values;
    for (int i = 0; i < 30; ++i) {
      double v = 100.0 * (1.0 + 0.03 * ((static_cast<int>(gen.rng()() % 200) - 100) / 100.0));
      if (i >= 15) v *= 1.3;
      values.push_back(v);
    }
    const auto base = detect_regressions(values_series(values), 7, 0.1);
    for (double c : {0.5, 7.0, 1e6}) {
      std::vector<double> scaled;
      for (double v : values) scaled.push_back(v * c);
      CHECK(detect_regressions(values_series(scaled), 7, 0.1) == base);
    }
  }
  SUBCASE("brute-force oracle over a noisy series") {
    test::ReportGen gen(13);
    std::vector<double> values;
    for (int i = 0; i < 40; ++i) {
      double v = 50.0 + static_cast<double>(gen.rng()() % 100) / 10.0;
      if (i == 20 || i == 21) v *= 1.5;
      values.push_back(v);
    }
    const size_t window = 5;
    const double threshold = 0.12;
    const auto flags =
        detect_regressions(values_series(values), window, threshold);

    // Oracle recomputed longhand with a full sort.
    std::vector<RegressionFlag> expected;
    for (size_t i = window; i < values.size(); ++i) {
      std::vector<double> hist(values.begin() + (i - window),
                               values.begin() + i);
      std::sort(hist.begin(), hist.end());
      const double med = window % 2 ? hist[window / 2]
                                    : 0.5 * (hist[window / 2 - 1] +
                                             hist[window / 2]);
      const double dev = (values[i] - med) / med;
      if (std::abs(dev) > threshold) {
        expected.push_back({i, dev > 0 ? FlagDirection::regression
                                       : FlagDirection::recovery});
      }
    }
    CHECK(flags == expected);
  }
  SUBCASE("window below 3 is rejected, short series yield nothing") {
    CHECK_THROWS_AS(detect_regressions(values_series({1, 2, 3, 4}), 2, 0.1),
                    DomainError);
    CHECK(detect_regressions(values_series({1, 2, 3}), 3, 0.1).empty());
  }
}

TEST_CASE("measurement window detection") {
  SUBCASE("step plateau against the all-intervals oracle") {
    // 0 W for 2 s, 100 W for 10 s, 0 W for 2 s, dt = 0.5 s.
    std::vector<double> totals;
    for (double t = 0.0; t <= 14.0 + 1e-9; t += 0.5) {
      totals.push_back(t >= 2.0 && t <= 12.0 ? 100.0 : 0.0);
    }
    const EnergyTrace tr = trace_of(0.5, totals);
    const auto window = detect_measurement_window(tr, 0.5);
    CHECK(window == window_oracle(tr, 0.5));
    CHECK(std::abs(window.first - 2.0) <= 0.5);
    CHECK(std::abs(window.second - 12.0) <= 0.5);
  }
  SUBCASE("constant power covers the full range") {
    const EnergyTrace tr = trace_of(1.0, std::vector<double>(11, 100.0));
    CHECK(detect_measurement_window(tr, 0.5) ==
          std::pair<double, double>{0.0, 10.0});
  }
  SUBCASE("manual override wins verbatim") {
    const EnergyTrace tr = trace_of(1.0, std::vector<double>(11, 100.0));
    CHECK(detect_measurement_window(tr, 0.5, std::make_pair(3.0, 5.0)) ==
          std::pair<double, double>{3.0, 5.0});
    CHECK_THROWS_AS(
        detect_measurement_window(tr, 0.5, std::make_pair(3.0, 50.0)),
        DomainError);
  }
  SUBCASE("all-zero trace has no active region") {
    const EnergyTrace tr = trace_of(1.0, std::vector<double>(5, 0.0));
    CHECK_THROWS_WITH_AS(detect_measurement_window(tr, 0.5),
                         doctest::Contains("no active region"), DomainError);
  }
  SUBCASE("idempotence on the detected restriction") {
    std::vector<double> totals;
    for (double t = 0.0; t <= 14.0 + 1e-9; t += 0.5) {
      totals.push_back(t >= 2.0 && t <= 12.0 ? 100.0 : 0.0);
    }
    const EnergyTrace tr = trace_of(0.5, totals);
    const auto window = detect_measurement_window(tr, 0.5);
    EnergyTrace restricted;
    for (const auto& s : tr.samples) {
      if (s.t >= window.first && s.t <= window.second) {
        restricted.samples.push_back(s);
      }
    }
    CHECK(detect_measurement_window(restricted, 0.5) ==
          std::pair<double, double>{restricted.samples.front().t,
                                    restricted.samples.back().t});
  }
  SUBCASE("a spike does not shrink the plateau reference") {
    std::vector<double> totals(41, 100.0);
    totals[20] = 10000.0;  // one-sample spike
    const EnergyTrace tr = trace_of(0.5, totals);
    const auto window = detect_measurement_window(tr, 0.5);
    CHECK(window.first == 0.0);
    CHECK(window.second == 20.0);
  }
}

TEST_CASE("energy integration") {
  SUBCASE("constant power, exact closed form") {
    EnergyTrace tr = trace_of(1.0, std::vector<double>(11, 100.0));
    tr.window = {0.0, 10.0};
    CHECK(energy_to_solution(tr) == 1000.0);
  }
  SUBCASE("linear ramp, trapezoid is exact") {
    EnergyTrace tr;
    for (int i = 0; i <= 10; ++i) {
      tr.samples.push_back({static_cast<double>(i), {10.0 * i}});
    }
    tr.window = {0.0, 10.0};
    CHECK(std::abs(energy_to_solution(tr) - 500.0) < 1e-9);
  }
  SUBCASE("device sum linearity") {
    EnergyTrace tr;
    for (int i = 0; i <= 10; ++i) {
      tr.samples.push_back(
          {static_cast<double>(i), {25.0, 25.0, 25.0, 25.0}});
    }
    tr.window = {0.0, 10.0};
    CHECK(energy_to_solution(tr) == 1000.0);
  }
  SUBCASE("scaling power by c scales energy by exactly c") {
    test::ReportGen gen(17);
    EnergyTrace tr;
    for (int i = 0; i <= 20; ++i) {
      tr.samples.push_back({0.5 * i, {gen.positive_real(), gen.positive_real()}});
    }
    tr.window = {1.0, 9.5};
    const double base = energy_to_solution(tr);
    const double c = 4.0;  // power of two keeps scaling bit-exact
    EnergyTrace scaled = tr;
    for (auto& s : scaled.samples) {
      for (auto& w : s.watts) w *= c;
    }
    CHECK(energy_to_solution(scaled) == c * base);
  }
  SUBCASE("window boundaries between samples interpolate") {
    EnergyTrace tr = trace_of(1.0, std::vector<double>(11, 100.0));
    tr.window = {0.5, 9.5};
    CHECK(std::abs(energy_to_solution(tr) - 900.0) < 1e-9);
  }
  SUBCASE("missing window points to the detector") {
    EnergyTrace tr = trace_of(1.0, std::vector<double>(11, 100.0));
    CHECK_THROWS_WITH_AS(energy_to_solution(tr),
                         doctest::Contains("detect_measurement_window"),
                         DomainError);
  }
}

TEST_CASE("sweep optimum") {
  const std::vector<SweepPoint> points{{1.2e9, 900.0, 10.0},
                                       {1.5e9, 800.0, 9.0},
                                       {1.8e9, 850.0, 8.0}};
  CHECK(sweep_optimum(points).frequency == 1.5e9);

  SUBCASE("single point is its own optimum") {
    CHECK(sweep_optimum({{2.0e9, 700.0, 5.0}}).frequency == 2.0e9);
  }
  SUBCASE("ties break toward lower frequency") {
    CHECK(sweep_optimum({{1.2e9, 800.0, 1.0}, {1.5e9, 800.0, 1.0}}).frequency ==
          1.2e9);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sweep_optimum({}), DomainError);
    CHECK_THROWS_AS(sweep_optimum({{1e9, 1.0, 1.0}, {1e9, 2.0, 1.0}}),
                    DomainError);
  }
  SUBCASE("argmin invariant under strictly increasing transforms") {
    auto transformed = points;
    for (auto& p : transformed) p.energy = std::sqrt(p.energy) + 7.0;
    CHECK(sweep_optimum(transformed).frequency ==
          sweep_optimum(points).frequency);
    for (auto& p : transformed) p.energy = std::log(p.energy);
    CHECK(sweep_optimum(transformed).frequency == 1.5e9);
  }
}

TEST_CASE("energy trace CSV ingestion") {
  CsvTable table;
  table.header = {"t_seconds", "device0_watts", "device1_watts"};
  table.rows = {{"0.0", "10", "20"}, {"1.0", "30", "40"}};
  const EnergyTrace tr = energy_trace_from_csv(table);
  REQUIRE(tr.samples.size() == 2);
  CHECK(tr.samples[0].watts == std::vector<double>{10.0, 20.0});
  CHECK(tr.samples[1].t == 1.0);

  SUBCASE("bad header") {
    CsvTable bad;
    bad.header = {"time", "watts"};
    bad.rows = {};
    CHECK_THROWS_AS(energy_trace_from_csv(bad), Error);
  }
  SUBCASE("bad cell carries coordinates") {
    table.rows[1][2] = "hot";
    CHECK_THROWS_WITH_AS(energy_trace_from_csv(table),
                         doctest::Contains("device1_watts"), Error);
  }
  SUBCASE("non-increasing times rejected") {
    table.rows[1][0] = "0.0";
    CHECK_THROWS_AS(energy_trace_from_csv(table), DomainError);
  }
}
