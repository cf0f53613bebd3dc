#include "exacb/orchestrator.hpp"

#include <pwd.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>

#include "exacb/subprocess.hpp"
#include "exacb/version.hpp"

namespace fs = std::filesystem;

namespace exacb {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? v : fallback;
}

std::string os_user() {
  if (const passwd* pw = getpwuid(geteuid()); pw && pw->pw_name) {
    return pw->pw_name;
  }
  return "unknown";
}

std::string hostname() {
  char buf[256] = {0};
  if (gethostname(buf, sizeof(buf) - 1) == 0 && buf[0]) return buf;
  return "localhost";
}

bool prefix_segment_ok(const std::string& seg) {
  if (seg.empty()) return false;
  for (char c : seg) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void run_fixture_step(const std::string& command, const std::string& name,
                      const std::string& working_dir) {
  ProcessOptions opts;
  opts.cwd = working_dir;
  ProcessResult res = run_shell(command, opts);
  if (!res.ok()) {
    throw FixtureError("fixture " + name + " failed (exit " +
                       std::to_string(res.exit_code) + "): " + res.err);
  }
}

}  // namespace

bool valid_prefix(const std::string& prefix) {
  if (prefix.empty()) return false;
  std::string segment;
  for (char c : prefix) {
    if (c == '.') {
      if (!prefix_segment_ok(segment)) return false;
      segment.clear();
    } else {
      segment.push_back(c);
    }
  }
  return prefix_segment_ok(segment);
}

ExecutionPlan plan_experiment(const ExperimentSpec& spec,
                              const std::string& working_dir,
                              const std::map<std::string, FixtureSteps>& fixtures,
                              const std::string& harness_command) {
  if (!valid_prefix(spec.prefix)) {
    throw ConfigError("invalid prefix: \"" + spec.prefix + "\"");
  }
  if (spec.machine.empty()) throw ConfigError("machine must be non-empty");
  if (spec.harness_kind == HarnessKind::jube_csv &&
      !fs::exists(spec.definition_path)) {
    throw ConfigError("definition not found: " + spec.definition_path);
  }
  if (spec.in_command.find('\n') != std::string::npos ||
      spec.in_command.find('\r') != std::string::npos) {
    throw ConfigError("in_command must be a single line");
  }

  ExecutionPlan plan;
  plan.spec = spec;
  plan.harness_command = harness_command;

  if (!spec.fixture.empty()) {
    auto it = fixtures.find(spec.fixture);
    if (it == fixtures.end()) {
      throw ConfigError("unknown fixture: \"" + spec.fixture + "\"");
    }
    plan.fixture_steps = it->second;
    plan.job_names.push_back(spec.prefix + ".setup");
  }
  plan.job_names.push_back(spec.prefix + ".run");
  plan.job_names.push_back(spec.prefix + ".collect");
  if (!spec.fixture.empty()) plan.job_names.push_back(spec.prefix + ".teardown");

  plan.invocation.harness_kind = spec.harness_kind;
  plan.invocation.definition_path = spec.definition_path;
  plan.invocation.tags = expand_tags(spec.machine, spec.usecase, spec.variant);
  plan.invocation.working_dir = working_dir;
  plan.invocation.launcher_prefix = spec.in_command;
  if (spec.record) plan.record_target = spec.prefix;
  return plan;
}

Reporter reporter_from_environment() {
  Reporter r;
  r.generator = std::string("exacb ") + kToolVersion;
  r.pipeline_id = env_or("EXACB_PIPELINE_ID", "local");
  r.job_id = env_or("EXACB_JOB_ID", std::to_string(getpid()));
  r.commit = env_or("EXACB_COMMIT", "unknown");
  r.user = env_or("EXACB_USER", os_user());
  r.system = hostname();
  r.software_version = "unknown";
  r.timestamp = now_utc();
  return r;
}

ExecutionResult execute_plan(const ExecutionPlan& plan) {
  const ExperimentSpec& spec = plan.spec;
  const std::string& working_dir = plan.invocation.working_dir;
  fs::create_directories(working_dir);

  const UtcSeconds started_at = now_utc();

  if (plan.fixture_steps && !plan.fixture_steps->setup.empty()) {
    run_fixture_step(plan.fixture_steps->setup, "setup", working_dir);
  }

  // Teardown must run exactly once after a successful setup, no matter how
  // the run step ends.
  ExecutionResult result;
  std::vector<HarnessRow> rows;
  try {
    const std::string csv_path =
        run_harness(plan.invocation, plan.harness_command);
    rows = parse_results_csv(csv_path);
  } catch (const HarnessError& e) {
    result.harness_ok = false;
    result.harness_error = e.what();
    // Result recovery: ingest whatever partial CSV the harness left behind.
    const std::string partial = working_dir + "/results.csv";
    if (fs::exists(partial)) {
      try {
        rows = parse_results_csv(partial);
      } catch (const Error&) {
      }
    }
  } catch (const Error& e) {
    result.harness_ok = false;
    result.harness_error = e.what();
  } catch (...) {
    if (plan.fixture_steps && !plan.fixture_steps->teardown.empty()) {
      run_fixture_step(plan.fixture_steps->teardown, "teardown", working_dir);
    }
    throw;
  }
  if (plan.fixture_steps && !plan.fixture_steps->teardown.empty()) {
    run_fixture_step(plan.fixture_steps->teardown, "teardown", working_dir);
  }

  std::vector<DataEntry> entries = rows_to_entries(rows);
  for (auto& entry : entries) {
    if (entry.queue.empty()) entry.queue = spec.queue;
  }

  Reporter reporter = reporter_from_environment();
  Experiment experiment;
  experiment.system = spec.machine;
  experiment.variant = spec.variant.empty() ? "default" : spec.variant;
  experiment.software_version = rows.empty() ? "unknown" : rows.front().version;
  experiment.started_at = started_at;
  reporter.software_version = experiment.software_version;

  BenchmarkReport report = new_report(reporter, experiment);
  if (!spec.project.empty()) report.parameter["project"] = spec.project;
  if (!spec.budget.empty()) report.parameter["budget"] = spec.budget;
  report.parameter["run_status"] = result.harness_ok ? "ok" : "failed";
  report.data = std::move(entries);

  if (result.harness_ok && report.data.empty()) {
    result.empty_csv_warning = true;
  }
  result.report = std::move(report);
  return result;
}

ExecutionPlan inject_feature(const ExecutionPlan& plan,
                             const std::string& command) {
  if (command.empty()) throw DomainError("inject_feature: empty command");
  if (command.find('\n') != std::string::npos ||
      command.find('\r') != std::string::npos) {
    throw DomainError("inject_feature: command must be a single line");
  }
  ExecutionPlan injected = plan;
  injected.invocation.launcher_prefix = command;
  injected.spec.in_command = command;
  return injected;
}

std::string record_results(const BenchmarkReport& report,
                           const std::string& target,
                           const ResultStore& store) {
  const std::string key = target + "/" + report.reporter.pipeline_id + "/" +
                          report.reporter.job_id + ".json";
  try {
    put_report(store, key, serialize_report(report));
  } catch (const StoreError& e) {
    throw StoreError("record " + key + ": " + e.what());
  }
  return key;
}

}  // namespace exacb
