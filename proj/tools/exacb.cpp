#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "exacb/config.hpp"
#include "exacb/orchestrator.hpp"
#include "exacb/protocol.hpp"
#include "exacb/store.hpp"
#include "exacb/timeutil.hpp"
#include "exacb/workload.hpp"

#include "analyze.hpp"
#include "context.hpp"

namespace fs = std::filesystem;
using namespace exacb;
using namespace exacb::cli;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << bytes;
  if (!out) throw Error("write failed for " + path);
}

int cmd_run(const std::string& spec_path, const ToolContext& ctx) {
  const ExperimentSpec spec = load_experiment_spec(spec_path);
  const std::string working_dir = ctx.out_dir + "/" + spec.prefix;
  const ExecutionPlan plan = plan_experiment(
      spec, working_dir, ctx.config.fixtures, ctx.config.harness_command);

  const ExecutionResult result = execute_plan(plan);
  if (result.empty_csv_warning) {
    std::cerr << "warning: harness produced an empty results.csv\n";
  }
  if (!result.harness_ok) {
    std::cerr << "benchmark failed: " << result.harness_error << "\n";
  }

  const std::string report_path = ctx.out_dir + "/" + spec.prefix +
                                  ".report.json";
  write_file(report_path, serialize_report(result.report));

  if (plan.record_target) {
    const ResultStore store = ctx.resolve_store();
    const std::string key =
        record_results(result.report, *plan.record_target, store);
    std::cout << key << "\n";
  } else {
    std::cout << report_path << "\n";
  }
  return result.harness_ok ? kExitOk : kExitFailure;
}

int cmd_validate(const std::vector<std::string>& paths) {
  int failures = 0;
  for (const auto& path : paths) {
    std::string bytes;
    try {
      bytes = read_file(path);
    } catch (const Error& e) {
      std::cout << path << ": " << e.what() << "\n";
      ++failures;
      continue;
    }
    const ValidationResult result = validate_report_text(bytes);
    if (result.ok()) {
      std::cout << path << ": OK\n";
    } else {
      ++failures;
      std::cout << path << ":\n";
      for (const auto& error : result.errors) {
        std::cout << "  " << error << "\n";
      }
    }
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_store_push(const std::string& file, const std::string& key,
                   bool external, const ToolContext& ctx) {
  const ResultStore store = ctx.resolve_store();
  const std::string bytes = read_file(file);
  const StoreReceipt receipt = external ? inject_external(store, key, bytes)
                                        : put_report(store, key, bytes);
  std::cout << receipt.key << "\n";
  return kExitOk;
}

int cmd_store_pull(const std::string& key, const std::string& dest,
                   const ToolContext& ctx) {
  const ResultStore store = ctx.resolve_store();
  const std::string bytes = get_report(store, key);
  if (dest.empty() || dest == "-") {
    std::cout << bytes;
  } else {
    write_file(dest, bytes);
  }
  return kExitOk;
}

int cmd_store_list(const std::string& prefix, const std::string& from,
                   const std::string& to, const ToolContext& ctx) {
  const ResultStore store = ctx.resolve_store();
  std::optional<std::pair<UtcSeconds, UtcSeconds>> span;
  if (!from.empty() || !to.empty()) {
    auto lo = parse_utc_or_date(from.empty() ? "1970-01-01" : from);
    auto hi = parse_utc_or_date(to.empty() ? "9999-12-31" : to);
    if (!lo || !hi) {
      throw ConfigError("--from/--to must be YYYY-MM-DD or "
                        "YYYY-MM-DDTHH:MM:SSZ");
    }
    span = std::make_pair(*lo, *hi);
  }
  for (const auto& key : list_reports(store, prefix, span)) {
    std::cout << key << "\n";
  }
  return kExitOk;
}

int cmd_workload_logmap(unsigned workload, double intensity, double r,
                        double x0, const std::string& outdir) {
  LogmapParams params;
  params.workload = workload;
  params.intensity = intensity;
  params.r = r;
  params.x0 = x0;
  const WorkloadResult result = run_workload(params);
  fs::create_directories(outdir);
  emit_outputs(result, outdir);
  std::cout << "checksum=" << result.checksum << "\n";
  std::cout << "runtime=" << result.runtime << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-benchmarking toolkit: runs benchmarks through a "
               "harness adapter, records protocol reports, analyzes them."};
  app.require_subcommand(1);

  std::string config_path, store_flag, out_dir = "exacb-out";
  app.add_option("--config", config_path, "tool configuration file (JSON)");
  app.add_option("--store", store_flag,
                 "result store (fs:<dir>, git:<repo> or plain directory)");
  app.add_option("--out-dir", out_dir, "directory for generated files");

  auto* run = app.add_subcommand("run", "plan and execute an experiment spec");
  std::string spec_path;
  run->add_option("spec", spec_path, "experiment spec file (JSON)")
      ->required();

  auto* analyze = app.add_subcommand("analyze", "post-process stored reports");
  std::string kind, analyze_config;
  analyze->add_option("kind", kind,
                      "comparison | timeseries | scaling | energy")
      ->required();
  analyze->add_option("config", analyze_config, "analysis config file (JSON)")
      ->required();

  auto* validate = app.add_subcommand("validate", "validate report files");
  std::vector<std::string> validate_paths;
  validate->add_option("files", validate_paths, "report files")->required();

  auto* store_cmd = app.add_subcommand("store", "raw store operations");
  store_cmd->require_subcommand(1);
  auto* push = store_cmd->add_subcommand("push", "store a report file");
  std::string push_file, push_key;
  bool push_external = false;
  push->add_option("file", push_file)->required();
  push->add_option("key", push_key)->required();
  push->add_flag("--external", push_external,
                 "validate and mark as externally injected (trusted=false)");
  auto* pull = store_cmd->add_subcommand("pull", "fetch stored bytes");
  std::string pull_key, pull_dest;
  pull->add_option("key", pull_key)->required();
  pull->add_option("dest", pull_dest, "output file ('-' for stdout)");
  auto* list = store_cmd->add_subcommand("list", "list keys by prefix");
  std::string list_prefix, list_from, list_to;
  list->add_option("prefix", list_prefix);
  list->add_option("--from", list_from, "started_at lower bound");
  list->add_option("--to", list_to, "started_at upper bound");

  auto* workload = app.add_subcommand("workload", "run a builtin workload");
  workload->require_subcommand(1);
  auto* logmap = workload->add_subcommand("logmap", "logistic-map benchmark");
  unsigned w_workload = 2;
  double w_intensity = 0.1, w_r = 2.4, w_x0 = 0.5;
  std::string w_outdir = ".";
  logmap->add_option("--workload", w_workload, "vector size exponent (10^w)");
  logmap->add_option("--intensity", w_intensity,
                     "iterations per element / 1000");
  logmap->add_option("--r", w_r, "map parameter in [0,4]");
  logmap->add_option("--x0", w_x0, "initial value in [0,1]");
  logmap->add_option("--outdir", w_outdir, "where logmap.out/.stats land");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ToolContext ctx;
    if (!config_path.empty()) ctx.config = load_cli_config(config_path);
    ctx.store_flag = store_flag;
    ctx.out_dir = out_dir;

    if (*run) return cmd_run(spec_path, ctx);
    if (*analyze) return cmd_analyze(kind, analyze_config, ctx);
    if (*validate) return cmd_validate(validate_paths);
    if (*store_cmd) {
      if (*push) return cmd_store_push(push_file, push_key, push_external, ctx);
      if (*pull) return cmd_store_pull(pull_key, pull_dest, ctx);
      if (*list) return cmd_store_list(list_prefix, list_from, list_to, ctx);
    }
    if (*workload) {
      return cmd_workload_logmap(w_workload, w_intensity, w_r, w_x0, w_outdir);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
