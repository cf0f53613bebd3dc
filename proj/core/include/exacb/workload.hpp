#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace exacb {

// Knob-to-math mapping: a vector of N = 10^workload elements, each seeded
// x0 and iterated k = round(1000 * intensity) steps of x <- r*x*(1-x).
struct LogmapParams {
  unsigned workload = 2;     // exponent w, N = 10^w, w <= 9
  double intensity = 0.1;    // rho >= 0, k = round(1000*rho)
  double r = 2.4;            // map parameter in [0, 4]
  double x0 = 0.5;           // initial value in [0, 1]
};

struct WorkloadResult {
  double checksum = 0.0;  // sum of final element values
  double runtime = 0.0;   // wall seconds
  std::map<std::string, double> phase_timings;  // init, compute, reduce
};

// x_steps of the logistic recurrence. Result stays in [0, 1] for in-domain
// inputs. Throws DomainError outside 0<=x0<=1, 0<=r<=4.
double iterate(double x0, double r, std::uint64_t steps);

// Throws DomainError for invalid params; workload > 9 trips the resource
// guard before any allocation happens.
WorkloadResult run_workload(const LogmapParams& params);

// Writes logmap.out (checksum + runtime) and logmap.stats (phase timings as
// key=value lines) into dir. Returns the two paths.
std::pair<std::string, std::string> emit_outputs(const WorkloadResult& result,
                                                 const std::string& dir);

// Number of compute threads run_workload will use for a given element
// count. Exposed so harness adapters can report it.
unsigned workload_threads(std::uint64_t elements);

}  // namespace exacb
