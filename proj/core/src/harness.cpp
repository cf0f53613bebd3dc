#include "exacb/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "exacb/csv.hpp"
#include "exacb/subprocess.hpp"
#include "exacb/workload.hpp"

namespace fs = std::filesystem;

namespace exacb {

namespace {

constexpr std::array<const char*, 10> kRequiredColumns = {
    "system",        "version",         "queue",   "variant", "jobid",
    "nodes",         "taskspernode",    "threadspertasks",
    "runtime",       "success"};

std::optional<double> parse_double_strict(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_int_strict(const std::string& s) {
  if (s.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<bool> parse_bool(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  return std::nullopt;
}

[[noreturn]] void cell_error(size_t row, const std::string& column,
                             const std::string& what) {
  throw Error("results.csv row " + std::to_string(row) + ", column " + column +
              ": " + what);
}

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Variant tags steer the builtin workload. Named presets cover the common
// scales; key=value tags override individual knobs. Unrecognized tags are
// ignored the way an external harness ignores tags its script never gates
// on.
LogmapParams params_from_tags(const std::vector<std::string>& tags) {
  LogmapParams params;
  auto knob = [&](const std::string& tag, const char* key,
                  std::string* out) {
    const std::string prefix = std::string(key) + "=";
    if (tag.rfind(prefix, 0) == 0) {
      *out = tag.substr(prefix.size());
      return true;
    }
    return false;
  };
  for (size_t i = 1; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    std::string value;
    if (tag == "tiny") {
      params.workload = 1;
      params.intensity = 0.01;
    } else if (tag == "small") {
      params.workload = 2;
      params.intensity = 0.1;
    } else if (tag == "medium") {
      params.workload = 4;
      params.intensity = 0.5;
    } else if (tag == "large-workload") {
      params.workload = 6;
    } else if (tag == "large-intensity") {
      params.intensity = 2.4;
    } else if (knob(tag, "workload", &value)) {
      auto parsed = parse_int_strict(value);
      if (!parsed || *parsed < 0) {
        throw ConfigError("builtin_logmap: bad tag \"" + tag + "\"");
      }
      params.workload = static_cast<unsigned>(*parsed);
    } else if (knob(tag, "intensity", &value)) {
      auto parsed = parse_double_strict(value);
      if (!parsed) throw ConfigError("builtin_logmap: bad tag \"" + tag + "\"");
      params.intensity = *parsed;
    } else if (knob(tag, "r", &value)) {
      auto parsed = parse_double_strict(value);
      if (!parsed) throw ConfigError("builtin_logmap: bad tag \"" + tag + "\"");
      params.r = *parsed;
    } else if (knob(tag, "x0", &value)) {
      auto parsed = parse_double_strict(value);
      if (!parsed) throw ConfigError("builtin_logmap: bad tag \"" + tag + "\"");
      params.x0 = *parsed;
    }
  }
  return params;
}

std::string join_tags(const std::vector<std::string>& tags, size_t from,
                      const char* sep) {
  std::string out;
  for (size_t i = from; i < tags.size(); ++i) {
    if (!out.empty()) out += sep;
    out += tags[i];
  }
  return out;
}

std::string substitute(std::string tmpl, const std::string& key,
                       const std::string& value) {
  const std::string placeholder = "{" + key + "}";
  size_t pos = 0;
  while ((pos = tmpl.find(placeholder, pos)) != std::string::npos) {
    tmpl.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return tmpl;
}

void write_run_script(const HarnessInvocation& inv,
                      const std::string& launch_line) {
  std::ofstream script(inv.working_dir + "/run.sh");
  if (!script) {
    throw HarnessError("cannot write " + inv.working_dir + "/run.sh");
  }
  script << "#!/bin/sh\n";
  script << "set -e\n";
  if (!inv.launcher_prefix.empty()) script << inv.launcher_prefix << "\n";
  script << launch_line << "\n";
}

std::string builtin_launch_line(const LogmapParams& params) {
  std::string line = "exacb workload logmap";
  line += " --workload " + std::to_string(params.workload);
  line += " --intensity " + format_double(params.intensity, "%g");
  line += " --r " + format_double(params.r, "%g");
  line += " --x0 " + format_double(params.x0, "%g");
  line += " --outdir .";
  return line;
}

std::string run_builtin(const HarnessInvocation& inv) {
  const LogmapParams params = params_from_tags(inv.tags);
  write_run_script(inv, builtin_launch_line(params));

  WorkloadResult result;
  try {
    result = run_workload(params);
  } catch (const DomainError& e) {
    throw HarnessError(std::string("builtin_logmap failed: ") + e.what());
  }
  emit_outputs(result, inv.working_dir);

  std::uint64_t n = 1;
  for (unsigned i = 0; i < params.workload; ++i) n *= 10;

  HarnessRow row;
  row.system = inv.tags.front();
  row.version = "local";
  row.queue = "";  // filled in by the orchestrator from the spec
  row.variant = inv.tags.size() > 1 ? join_tags(inv.tags, 1, "+") : "default";
  const char* job_env = std::getenv("EXACB_JOB_ID");
  row.jobid = job_env ? job_env : std::to_string(getpid());
  row.nodes = 1;
  row.taskspernode = 1;
  row.threadspertasks = workload_threads(n);
  row.runtime = result.runtime;
  row.success = true;
  row.extras.emplace_back("checksum", format_double(result.checksum, "%.17g"));
  for (const auto& [phase, secs] : result.phase_timings) {
    row.extras.emplace_back(phase, format_double(secs, "%.9f"));
  }

  const std::string csv_path = inv.working_dir + "/results.csv";
  write_results_csv(csv_path, {row});
  return csv_path;
}

std::string run_external(const HarnessInvocation& inv,
                         const std::string& harness_command) {
  if (!fs::exists(inv.definition_path)) {
    throw HarnessError("definition not found: " + inv.definition_path);
  }
  const std::string tmpl =
      harness_command.empty() ? kDefaultHarnessCommand : harness_command;
  std::string launch = substitute(tmpl, "definition",
                                  fs::absolute(inv.definition_path).string());
  launch = substitute(launch, "tags", join_tags(inv.tags, 0, " "));
  write_run_script(inv, launch);

  ProcessOptions opts;
  opts.cwd = inv.working_dir;
  ProcessResult proc = run_process({"/bin/sh", "run.sh"}, opts);
  if (!proc.ok()) {
    throw HarnessError("harness exited with code " +
                       std::to_string(proc.exit_code) + "\nstdout:\n" +
                       proc.out + "\nstderr:\n" + proc.err);
  }
  const std::string csv_path = inv.working_dir + "/results.csv";
  if (!fs::exists(csv_path)) {
    throw HarnessError("harness succeeded but produced no results.csv in " +
                       inv.working_dir);
  }
  return csv_path;
}

}  // namespace

std::vector<std::string> expand_tags(const std::string& machine,
                                     const std::string& usecase,
                                     const std::string& variant) {
  if (machine.empty()) throw DomainError("expand_tags: machine must be non-empty");
  std::vector<std::string> tags{machine};
  if (!usecase.empty()) tags.push_back(usecase);
  if (!variant.empty()) tags.push_back(variant);
  return tags;
}

std::string run_harness(const HarnessInvocation& inv,
                        const std::string& harness_command) {
  if (inv.tags.empty() || inv.tags.front().empty()) {
    throw HarnessError("invocation needs a leading system tag");
  }
  if (inv.working_dir.empty()) {
    throw HarnessError("invocation needs a working_dir");
  }
  fs::create_directories(inv.working_dir);
  if (inv.harness_kind == HarnessKind::builtin_logmap) {
    return run_builtin(inv);
  }
  return run_external(inv, harness_command);
}

std::vector<HarnessRow> parse_results_rows(const CsvTable& table) {
  // Header names are case-sensitive; duplicates would break the column
  // conservation contract.
  for (size_t i = 0; i < table.header.size(); ++i) {
    for (size_t j = i + 1; j < table.header.size(); ++j) {
      if (table.header[i] == table.header[j]) {
        throw Error("duplicate column: " + table.header[i]);
      }
    }
  }
  std::vector<int> required_idx(kRequiredColumns.size(), -1);
  for (size_t c = 0; c < kRequiredColumns.size(); ++c) {
    for (size_t h = 0; h < table.header.size(); ++h) {
      if (table.header[h] == kRequiredColumns[c]) {
        required_idx[c] = static_cast<int>(h);
        break;
      }
    }
    if (required_idx[c] < 0) {
      throw Error(std::string("missing column: ") + kRequiredColumns[c]);
    }
  }
  std::vector<size_t> extra_idx;
  for (size_t h = 0; h < table.header.size(); ++h) {
    bool required = false;
    for (int idx : required_idx) {
      if (idx == static_cast<int>(h)) required = true;
    }
    if (!required) extra_idx.push_back(h);
  }

  std::vector<HarnessRow> rows;
  rows.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const size_t rownum = r + 1;
    HarnessRow row;
    row.system = cells[required_idx[0]];
    row.version = cells[required_idx[1]];
    row.queue = cells[required_idx[2]];
    row.variant = cells[required_idx[3]];
    row.jobid = cells[required_idx[4]];

    auto read_count = [&](size_t col, const char* name) {
      auto parsed = parse_int_strict(cells[required_idx[col]]);
      if (!parsed || *parsed < 1) {
        cell_error(rownum, name, "not a positive integer: \"" +
                                     cells[required_idx[col]] + "\"");
      }
      return *parsed;
    };
    row.nodes = read_count(5, "nodes");
    row.taskspernode = read_count(6, "taskspernode");
    row.threadspertasks = read_count(7, "threadspertasks");

    auto runtime = parse_double_strict(cells[required_idx[8]]);
    if (!runtime || *runtime < 0.0) {
      cell_error(rownum, "runtime",
                 "not a non-negative real: \"" + cells[required_idx[8]] + "\"");
    }
    row.runtime = *runtime;

    auto success = parse_bool(cells[required_idx[9]]);
    if (!success) {
      cell_error(rownum, "success",
                 "not a boolean: \"" + cells[required_idx[9]] + "\"");
    }
    row.success = *success;

    for (size_t h : extra_idx) row.extras.emplace_back(table.header[h], cells[h]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<HarnessRow> parse_results_csv(const std::string& path) {
  return parse_results_rows(read_csv_file(path));
}

std::vector<DataEntry> rows_to_entries(const std::vector<HarnessRow>& rows) {
  std::vector<DataEntry> entries;
  entries.reserve(rows.size());
  for (const auto& row : rows) {
    DataEntry entry;
    entry.success = row.success;
    entry.runtime = row.runtime;
    entry.nodes = row.nodes;
    entry.tasks_per_node = row.taskspernode;
    entry.threads_per_task = row.threadspertasks;
    entry.job_id = row.jobid;
    entry.queue = row.queue;
    for (const auto& [key, value] : row.extras) {
      if (auto num = parse_double_strict(value)) {
        entry.metrics[key] = *num;
      } else {
        entry.metrics[key] = value;
      }
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

void write_results_csv(const std::string& path,
                       const std::vector<HarnessRow>& rows) {
  CsvTable table;
  for (const char* col : kRequiredColumns) table.header.push_back(col);
  if (!rows.empty()) {
    for (const auto& [key, value] : rows.front().extras) {
      table.header.push_back(key);
    }
  }
  for (const auto& row : rows) {
    std::vector<std::string> cells{
        row.system,
        row.version,
        row.queue,
        row.variant,
        row.jobid,
        std::to_string(row.nodes),
        std::to_string(row.taskspernode),
        std::to_string(row.threadspertasks),
        format_double(row.runtime, "%.17g"),
        row.success ? "true" : "false"};
    for (const auto& [key, value] : row.extras) cells.push_back(value);
    if (cells.size() != table.header.size()) {
      throw Error("write_results_csv: rows disagree on extra columns");
    }
    table.rows.push_back(std::move(cells));
  }
  write_csv_file(path, table);
}

}  // namespace exacb
