#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exacb/errors.hpp"
#include "exacb/timeutil.hpp"

namespace exacb {

// A metric is either a finite real or a string. Non-finite reals are
// rejected at validation.
using MetricValue = std::variant<double, std::string>;

struct Reporter {
  std::string generator;
  std::string pipeline_id;
  std::string job_id;
  std::string commit;  // empty or "unknown" means absent, else 7-64 hex chars
  std::string user;
  std::string system;
  std::string software_version;
  UtcSeconds timestamp = 0;

  bool operator==(const Reporter&) const = default;
};

struct Experiment {
  std::string system;
  std::string software_version;
  std::string variant;
  UtcSeconds started_at = 0;

  bool operator==(const Experiment&) const = default;
};

struct DataEntry {
  bool success = false;
  double runtime = 0.0;  // seconds, >= 0
  long long nodes = 1;
  long long tasks_per_node = 1;
  long long threads_per_task = 1;
  std::string job_id;
  std::string queue;
  std::map<std::string, MetricValue> metrics;

  bool operator==(const DataEntry&) const = default;
};

struct BenchmarkReport {
  std::string version;
  Reporter reporter;
  std::map<std::string, std::string> parameter;
  Experiment experiment;
  std::vector<DataEntry> data;

  bool operator==(const BenchmarkReport&) const = default;
};

// Thrown by operations that require valid values up front.
// Validation of untrusted documents never throws; see ValidationResult.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> paths);
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
};

struct ValidationResult {
  std::optional<BenchmarkReport> report;
  std::vector<std::string> errors;

  bool ok() const { return report.has_value(); }
};

// Fresh report at the current schema version with empty parameter map and
// empty data list. Throws ValidationError naming the offending field.
BenchmarkReport new_report(const Reporter& reporter,
                           const Experiment& experiment);

// Total validation of a parsed document tree: every structured document
// yields either a typed report or a failure listing all violated paths.
ValidationResult validate_report(const nlohmann::json& doc);

// Same, starting from raw bytes. Parse errors become a validation failure.
ValidationResult validate_report_text(const std::string& text);

// Deterministic UTF-8 JSON: fixed key order, two-space indent, trailing
// newline. Equal reports serialize to identical bytes.
std::string serialize_report(const BenchmarkReport& report);

// serialize_report's inverse; throws ValidationError when bytes do not
// validate.
BenchmarkReport deserialize_report(const std::string& bytes);

// Concatenates data lists in input order. Inputs must agree on version,
// experiment.system and experiment.variant; parameter maps must not clash.
// Reporter and experiment are taken from the first input.
BenchmarkReport merge_reports(const std::vector<BenchmarkReport>& reports);

}  // namespace exacb
