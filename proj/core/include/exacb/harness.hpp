#pragma once

#include <string>
#include <utility>
#include <vector>

#include "exacb/protocol.hpp"

namespace exacb {

// One row of the harness result CSV. The ten named fields are the required
// column contract; every other column lands in extras in header order.
struct HarnessRow {
  std::string system;
  std::string version;
  std::string queue;
  std::string variant;
  std::string jobid;
  long long nodes = 1;
  long long taskspernode = 1;
  long long threadspertasks = 1;
  double runtime = 0.0;
  bool success = false;
  std::vector<std::pair<std::string, std::string>> extras;

  bool operator==(const HarnessRow&) const = default;
};

enum class HarnessKind { jube_csv, builtin_logmap };

struct HarnessInvocation {
  HarnessKind harness_kind = HarnessKind::builtin_logmap;
  std::string definition_path;
  std::vector<std::string> tags;  // system tag first, then variant tags
  std::string working_dir;
  std::string launcher_prefix;  // optional injected command line

  bool operator==(const HarnessInvocation&) const = default;
};

// The command run_harness spawns for external harness kinds, with
// {definition} and {tags} placeholders.
inline constexpr const char* kDefaultHarnessCommand =
    "jube run {definition} --tags {tags}";

// [machine] ++ non-empty members of [usecase, variant], in that order.
std::vector<std::string> expand_tags(const std::string& machine,
                                     const std::string& usecase,
                                     const std::string& variant);

// Runs the harness and returns the path of the produced results.csv.
// Generates working_dir/run.sh with the (optionally injected) launch line;
// never modifies definition_path. jube_csv executes run.sh through /bin/sh,
// builtin_logmap runs the workload module in-process and synthesizes the
// same CSV contract.
std::string run_harness(const HarnessInvocation& inv,
                        const std::string& harness_command = {});

std::vector<HarnessRow> parse_results_csv(const std::string& path);
std::vector<HarnessRow> parse_results_rows(const struct CsvTable& table);

// Extras whose values parse as finite reals become numeric metrics, the
// rest string metrics. Row order is preserved.
std::vector<DataEntry> rows_to_entries(const std::vector<HarnessRow>& rows);

// Inverse of parse on the row level, used for synthesis and tests.
void write_results_csv(const std::string& path,
                       const std::vector<HarnessRow>& rows);

}  // namespace exacb
