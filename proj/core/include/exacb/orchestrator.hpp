#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exacb/harness.hpp"
#include "exacb/protocol.hpp"
#include "exacb/store.hpp"

namespace exacb {

// Declarative experiment input, mirroring the execution component's keys.
struct ExperimentSpec {
  std::string prefix;  // dotted job-name prefix, [A-Za-z0-9_-]+(\.[...])*
  std::string usecase;
  std::string variant;
  std::string definition_path;
  std::string machine;
  std::string queue;
  std::string project;
  std::string budget;
  std::string fixture;  // optional fixture name
  bool record = false;
  std::string in_command;  // optional injected command
  HarnessKind harness_kind = HarnessKind::builtin_logmap;

  bool operator==(const ExperimentSpec&) const = default;
};

struct FixtureSteps {
  std::string setup;
  std::string teardown;

  bool operator==(const FixtureSteps&) const = default;
};

struct ExecutionPlan {
  std::vector<std::string> job_names;
  HarnessInvocation invocation;
  std::optional<FixtureSteps> fixture_steps;
  std::optional<std::string> record_target;
  // Carried through for report assembly and fixtures.
  ExperimentSpec spec;
  std::string harness_command;

  bool operator==(const ExecutionPlan&) const = default;
};

struct ExecutionResult {
  BenchmarkReport report;
  bool harness_ok = true;
  bool empty_csv_warning = false;
  std::string harness_error;
};

bool valid_prefix(const std::string& prefix);

// Deterministic plan: job names [prefix.setup]? prefix.run prefix.collect
// [prefix.teardown]?, invocation tags from expand_tags, launcher_prefix
// from in_command, record target = prefix iff record. Fixture names resolve
// through the supplied table; an unknown name is a ConfigError.
ExecutionPlan plan_experiment(
    const ExperimentSpec& spec, const std::string& working_dir,
    const std::map<std::string, FixtureSteps>& fixtures = {},
    const std::string& harness_command = {});

// setup fixture -> harness -> CSV ingest -> report. Teardown runs exactly
// once iff setup succeeded, regardless of the run step's outcome. A harness
// failure is not thrown: any partial CSV is still ingested and the report
// is marked failed (parameter run_status), so results survive for recovery.
ExecutionResult execute_plan(const ExecutionPlan& plan);

// Plan with launcher_prefix = command; the benchmark definition stays
// untouched. Idempotent. Multi-line commands are rejected.
ExecutionPlan inject_feature(const ExecutionPlan& plan,
                             const std::string& command);

// Stores serialize_report(report) under
// "<target>/<reporter.pipeline_id>/<reporter.job_id>.json".
std::string record_results(const BenchmarkReport& report,
                           const std::string& target,
                           const ResultStore& store);

// Reporter fields from the environment: EXACB_PIPELINE_ID, EXACB_JOB_ID,
// EXACB_COMMIT, EXACB_USER, with fallbacks "local", the process id,
// "unknown", and the OS user.
Reporter reporter_from_environment();

}  // namespace exacb
