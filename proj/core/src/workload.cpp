#include "exacb/workload.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <vector>

#include "exacb/errors.hpp"

namespace exacb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_domain(double x0, double r) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) {
    throw DomainError("logmap: x0 must be in [0, 1]");
  }
  if (!(r >= 0.0 && r <= 4.0)) {
    throw DomainError("logmap: r must be in [0, 4]");
  }
}

}  // namespace

double iterate(double x0, double r, std::uint64_t steps) {
  check_domain(x0, r);
  double x = x0;
  for (std::uint64_t i = 0; i < steps; ++i) x = r * x * (1.0 - x);
  return x;
}

unsigned workload_threads(std::uint64_t elements) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (elements < 10000) return 1;  // not worth spawning for tiny vectors
  return static_cast<unsigned>(
      std::min<std::uint64_t>(hw, elements / 10000 + 1));
}

WorkloadResult run_workload(const LogmapParams& params) {
  if (params.workload > 9) {
    throw DomainError("logmap: workload exponent > 9 exceeds resource guard");
  }
  if (!(params.intensity >= 0.0)) {
    throw DomainError("logmap: intensity must be >= 0");
  }
  check_domain(params.x0, params.r);

  const std::uint64_t n = [&] {
    std::uint64_t v = 1;
    for (unsigned i = 0; i < params.workload; ++i) v *= 10;
    return v;
  }();
  const std::uint64_t steps =
      static_cast<std::uint64_t>(std::llround(1000.0 * params.intensity));

  WorkloadResult result;
  const auto t0 = Clock::now();

  std::vector<double> values(n, params.x0);
  result.phase_timings["init"] = seconds_since(t0);

  const auto t1 = Clock::now();
  const unsigned threads = workload_threads(n);
  const double r = params.r;
  auto worker = [&values, r, steps](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      double x = values[i];
      for (std::uint64_t s = 0; s < steps; ++s) x = r * x * (1.0 - x);
      values[i] = x;
    }
  };
  if (threads <= 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::uint64_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t lo = static_cast<std::uint64_t>(t) * chunk;
      const std::uint64_t hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  result.phase_timings["compute"] = seconds_since(t1);

  // Sequential index-order reduction keeps the checksum bit-identical
  // regardless of thread count.
  const auto t2 = Clock::now();
  double sum = 0.0;
  for (double v : values) sum += v;
  result.checksum = sum;
  result.phase_timings["reduce"] = seconds_since(t2);

  result.runtime = seconds_since(t0);
  return result;
}

namespace {

// Shortest exact decimal with a guaranteed decimal point, so values stay
// recognizably real-valued in the key=value files (1.25 -> "1.25",
// 1.0 -> "1.0").
std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s = buf;
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

}  // namespace

std::pair<std::string, std::string> emit_outputs(const WorkloadResult& result,
                                                 const std::string& dir) {
  const std::string out_path = dir + "/logmap.out";
  const std::string stats_path = dir + "/logmap.stats";

  std::ofstream out(out_path);
  if (!out) throw Error("logmap: cannot write " + out_path);
  out << "checksum=" << format_value(result.checksum) << "\n";
  out << "runtime=" << format_value(result.runtime) << "\n";
  if (!out) throw Error("logmap: write failed for " + out_path);

  std::ofstream stats(stats_path);
  if (!stats) throw Error("logmap: cannot write " + stats_path);
  stats << "# logmap.stats\n";
  for (const auto& [phase, secs] : result.phase_timings) {
    stats << phase << "=" << format_value(secs) << "\n";
  }
  if (!stats) throw Error("logmap: write failed for " + stats_path);

  return {out_path, stats_path};
}

}  // namespace exacb
