#include "exacb/protocol.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "exacb/version.hpp"

namespace exacb {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join_paths(const std::vector<std::string>& paths) {
  std::ostringstream ss;
  ss << "report validation failed:";
  for (const auto& p : paths) ss << "\n  " << p;
  return ss.str();
}

bool is_hex(const std::string& s) {
  for (char c : s) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
              (c >= 'A' && c <= 'F');
    if (!ok) return false;
  }
  return true;
}

bool commit_ok(const std::string& commit) {
  if (commit.empty() || commit == "unknown") return true;
  return commit.size() >= 7 && commit.size() <= 64 && is_hex(commit);
}

// Field-by-field checks shared between new_report (throwing) and
// validate_report (collecting).
void check_reporter(const Reporter& r, std::vector<std::string>& errors) {
  if (r.system.empty()) errors.push_back("reporter.system: must be non-empty");
  if (!commit_ok(r.commit)) {
    errors.push_back("reporter.commit: must be 7-64 hex characters");
  }
}

void check_experiment(const Experiment& e, std::vector<std::string>& errors) {
  if (e.system.empty()) {
    errors.push_back("experiment.system: must be non-empty");
  }
  if (e.variant.empty()) {
    errors.push_back("experiment.variant: must be non-empty");
  }
}

void check_entry(const DataEntry& d, size_t i,
                 std::vector<std::string>& errors) {
  const std::string at = "data[" + std::to_string(i) + "].";
  if (!(d.runtime >= 0.0) || !std::isfinite(d.runtime)) {
    errors.push_back(at + "runtime: must be ≥ 0");
  }
  if (d.nodes < 1) errors.push_back(at + "nodes: must be ≥ 1");
  if (d.tasks_per_node < 1) {
    errors.push_back(at + "tasks_per_node: must be ≥ 1");
  }
  if (d.threads_per_task < 1) {
    errors.push_back(at + "threads_per_task: must be ≥ 1");
  }
  for (const auto& [key, value] : d.metrics) {
    if (key.empty()) {
      errors.push_back(at + "metrics: empty key");
      continue;
    }
    if (const double* num = std::get_if<double>(&value);
        num && !std::isfinite(*num)) {
      errors.push_back(at + "metrics." + key +
                       ": must be a finite number or string");
    }
  }
}

struct FieldReader {
  const json& obj;
  const std::string prefix;  // "" or "reporter." etc.
  std::vector<std::string>& errors;

  const json* get(const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) {
      errors.push_back("missing: " + prefix + key);
      return nullptr;
    }
    return &*it;
  }

  std::string str(const char* key) const {
    const json* v = get(key);
    if (!v) return {};
    if (!v->is_string()) {
      errors.push_back(prefix + key + ": must be a string");
      return {};
    }
    return v->get<std::string>();
  }

  UtcSeconds time(const char* key) const {
    const json* v = get(key);
    if (!v) return 0;
    if (!v->is_string()) {
      errors.push_back(prefix + key + ": must be a string");
      return 0;
    }
    auto parsed = parse_utc(v->get<std::string>());
    if (!parsed) {
      errors.push_back(prefix + key +
                       ": invalid timestamp, expected YYYY-MM-DDTHH:MM:SSZ");
      return 0;
    }
    return *parsed;
  }

  bool boolean(const char* key) const {
    const json* v = get(key);
    if (!v) return false;
    if (!v->is_boolean()) {
      errors.push_back(prefix + key + ": must be a boolean");
      return false;
    }
    return v->get<bool>();
  }

  double number(const char* key) const {
    const json* v = get(key);
    if (!v) return 0.0;
    if (!v->is_number()) {
      errors.push_back(prefix + key + ": must be a number");
      return 0.0;
    }
    return v->get<double>();
  }

  long long integer(const char* key) const {
    const json* v = get(key);
    if (!v) return 0;
    if (!v->is_number_integer()) {
      errors.push_back(prefix + key + ": must be an integer");
      return 0;
    }
    return v->get<long long>();
  }
};

Reporter read_reporter(const json& obj, std::vector<std::string>& errors) {
  FieldReader f{obj, "reporter.", errors};
  Reporter r;
  r.generator = f.str("generator");
  r.pipeline_id = f.str("pipeline_id");
  r.job_id = f.str("job_id");
  r.commit = f.str("commit");
  r.user = f.str("user");
  r.system = f.str("system");
  r.software_version = f.str("software_version");
  r.timestamp = f.time("timestamp");
  return r;
}

Experiment read_experiment(const json& obj, std::vector<std::string>& errors) {
  FieldReader f{obj, "experiment.", errors};
  Experiment e;
  e.system = f.str("system");
  e.software_version = f.str("software_version");
  e.variant = f.str("variant");
  e.started_at = f.time("started_at");
  return e;
}

DataEntry read_entry(const json& obj, size_t i,
                     std::vector<std::string>& errors) {
  const std::string at = "data[" + std::to_string(i) + "].";
  FieldReader f{obj, at, errors};
  DataEntry d;
  d.success = f.boolean("success");
  d.runtime = f.number("runtime");
  d.nodes = f.integer("nodes");
  d.tasks_per_node = f.integer("tasks_per_node");
  d.threads_per_task = f.integer("threads_per_task");
  d.job_id = f.str("job_id");
  d.queue = f.str("queue");
  const json* metrics = f.get("metrics");
  if (metrics) {
    if (!metrics->is_object()) {
      errors.push_back(at + "metrics: must be an object");
    } else {
      for (auto it = metrics->begin(); it != metrics->end(); ++it) {
        if (it.key().empty()) {
          errors.push_back(at + "metrics: empty key");
          continue;
        }
        if (it->is_string()) {
          d.metrics[it.key()] = it->get<std::string>();
        } else if (it->is_number()) {
          d.metrics[it.key()] = it->get<double>();
        } else {
          errors.push_back(at + "metrics." + it.key() +
                           ": must be a finite number or string");
        }
      }
    }
  }
  return d;
}

ordered_json entry_to_json(const DataEntry& d) {
  ordered_json j;
  j["success"] = d.success;
  j["runtime"] = d.runtime;
  j["nodes"] = d.nodes;
  j["tasks_per_node"] = d.tasks_per_node;
  j["threads_per_task"] = d.threads_per_task;
  j["job_id"] = d.job_id;
  j["queue"] = d.queue;
  ordered_json metrics = ordered_json::object();
  for (const auto& [key, value] : d.metrics) {  // std::map: sorted, stable
    if (const double* num = std::get_if<double>(&value)) {
      metrics[key] = *num;
    } else {
      metrics[key] = std::get<std::string>(value);
    }
  }
  j["metrics"] = std::move(metrics);
  return j;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> paths)
    : Error(join_paths(paths)), paths_(std::move(paths)) {}

BenchmarkReport new_report(const Reporter& reporter,
                           const Experiment& experiment) {
  std::vector<std::string> errors;
  check_reporter(reporter, errors);
  check_experiment(experiment, errors);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  BenchmarkReport report;
  report.version = kSchemaVersion;
  report.reporter = reporter;
  report.experiment = experiment;
  return report;
}

ValidationResult validate_report(const json& doc) {
  ValidationResult result;
  auto& errors = result.errors;
  if (!doc.is_object()) {
    errors.push_back("invalid document: not an object");
    return result;
  }

  BenchmarkReport report;

  auto version = doc.find("version");
  if (version == doc.end()) {
    errors.push_back("missing: version");
  } else if (!version->is_string()) {
    errors.push_back("version: must be a string");
  } else {
    report.version = version->get<std::string>();
    if (report.version != kSchemaVersion) {
      errors.push_back("unsupported version");
    }
  }

  auto reporter = doc.find("reporter");
  if (reporter == doc.end()) {
    errors.push_back("missing: reporter");
  } else if (!reporter->is_object()) {
    errors.push_back("reporter: must be an object");
  } else {
    report.reporter = read_reporter(*reporter, errors);
    check_reporter(report.reporter, errors);
  }

  // parameter is optional and defaults to empty; everything else is not.
  auto parameter = doc.find("parameter");
  if (parameter != doc.end()) {
    if (!parameter->is_object()) {
      errors.push_back("parameter: must be an object");
    } else {
      for (auto it = parameter->begin(); it != parameter->end(); ++it) {
        if (!it->is_string()) {
          errors.push_back("parameter." + it.key() + ": must be a string");
        } else {
          report.parameter[it.key()] = it->get<std::string>();
        }
      }
    }
  }

  auto experiment = doc.find("experiment");
  if (experiment == doc.end()) {
    errors.push_back("missing: experiment");
  } else if (!experiment->is_object()) {
    errors.push_back("experiment: must be an object");
  } else {
    report.experiment = read_experiment(*experiment, errors);
    check_experiment(report.experiment, errors);
  }

  auto data = doc.find("data");
  if (data == doc.end()) {
    errors.push_back("missing: data");
  } else if (!data->is_array()) {
    errors.push_back("data: must be an array");
  } else {
    for (size_t i = 0; i < data->size(); ++i) {
      const json& item = (*data)[i];
      if (!item.is_object()) {
        errors.push_back("data[" + std::to_string(i) + "]: must be an object");
        continue;
      }
      DataEntry entry = read_entry(item, i, errors);
      check_entry(entry, i, errors);
      report.data.push_back(std::move(entry));
    }
  }

  if (errors.empty()) result.report = std::move(report);
  return result;
}

ValidationResult validate_report_text(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    ValidationResult result;
    result.errors.push_back("invalid document: JSON parse error");
    return result;
  }
  return validate_report(doc);
}

std::string serialize_report(const BenchmarkReport& report) {
  ordered_json j;
  j["version"] = report.version;

  ordered_json rep;
  rep["generator"] = report.reporter.generator;
  rep["pipeline_id"] = report.reporter.pipeline_id;
  rep["job_id"] = report.reporter.job_id;
  rep["commit"] = report.reporter.commit;
  rep["user"] = report.reporter.user;
  rep["system"] = report.reporter.system;
  rep["software_version"] = report.reporter.software_version;
  rep["timestamp"] = format_utc(report.reporter.timestamp);
  j["reporter"] = std::move(rep);

  ordered_json param = ordered_json::object();
  for (const auto& [key, value] : report.parameter) param[key] = value;
  j["parameter"] = std::move(param);

  ordered_json exp;
  exp["system"] = report.experiment.system;
  exp["software_version"] = report.experiment.software_version;
  exp["variant"] = report.experiment.variant;
  exp["started_at"] = format_utc(report.experiment.started_at);
  j["experiment"] = std::move(exp);

  ordered_json data = ordered_json::array();
  for (const auto& entry : report.data) data.push_back(entry_to_json(entry));
  j["data"] = std::move(data);

  return j.dump(2) + "\n";
}

BenchmarkReport deserialize_report(const std::string& bytes) {
  ValidationResult result = validate_report_text(bytes);
  if (!result.ok()) throw ValidationError(std::move(result.errors));
  return std::move(*result.report);
}

BenchmarkReport merge_reports(const std::vector<BenchmarkReport>& reports) {
  if (reports.empty()) throw ConflictError("merge: no reports given");
  BenchmarkReport merged;
  merged.version = reports.front().version;
  merged.reporter = reports.front().reporter;
  merged.experiment = reports.front().experiment;
  for (const auto& r : reports) {
    if (r.version != merged.version) {
      throw ConflictError("merge: mixed schema versions");
    }
    if (r.experiment.system != merged.experiment.system ||
        r.experiment.variant != merged.experiment.variant) {
      throw ConflictError("merge: mixed experiment system/variant");
    }
    for (const auto& [key, value] : r.parameter) {
      auto [it, inserted] = merged.parameter.emplace(key, value);
      if (!inserted && it->second != value) {
        throw ConflictError("merge: conflicting parameter \"" + key + "\"");
      }
    }
    merged.data.insert(merged.data.end(), r.data.begin(), r.data.end());
  }
  return merged;
}

}  // namespace exacb
