#include "exacb/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace exacb {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc = json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ConfigError(path + ": JSON parse error");
  if (!doc.is_object()) throw ConfigError(path + ": expected a JSON object");
  return doc;
}

void reject_unknown_keys(const json& doc,
                         std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) ok = true;
    }
    if (!ok) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
  }
}

std::string get_string(const json& doc, const char* key,
                       const std::string& where,
                       const std::string& fallback = {}) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_string()) {
    throw ConfigError(where + ": key \"" + std::string(key) +
                      "\" must be a string");
  }
  return it->get<std::string>();
}

bool get_flag(const json& doc, const char* key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end()) return false;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_string()) {
    const std::string v = it->get<std::string>();
    if (v == "true") return true;
    if (v == "false") return false;
  }
  throw ConfigError(where + ": key \"" + std::string(key) +
                    "\" must be true or false");
}

}  // namespace

CliConfig load_cli_config(const std::string& path) {
  const json doc = load_json_file(path);
  reject_unknown_keys(
      doc, {"store", "harness_command", "fixtures", "metric_orientation"},
      path);

  CliConfig config;
  if (auto it = doc.find("store"); it != doc.end()) {
    if (!it->is_string()) {
      throw ConfigError(path + ": key \"store\" must be a URI string "
                        "(fs:<dir>, git:<repo> or a plain directory)");
    }
    config.store_uri = it->get<std::string>();
  }
  config.harness_command = get_string(doc, "harness_command", path);
  if (!config.harness_command.empty()) {
    if (config.harness_command.find("{definition}") == std::string::npos ||
        config.harness_command.find("{tags}") == std::string::npos) {
      throw ConfigError(path +
                        ": harness_command needs {definition} and {tags} "
                        "placeholders");
    }
  }
  if (auto it = doc.find("fixtures"); it != doc.end()) {
    if (!it->is_object()) {
      throw ConfigError(path + ": key \"fixtures\" must be an object");
    }
    for (auto f = it->begin(); f != it->end(); ++f) {
      if (!f->is_object()) {
        throw ConfigError(path + ": fixture \"" + f.key() +
                          "\" must be an object");
      }
      reject_unknown_keys(*f, {"setup", "teardown"},
                          path + ": fixture \"" + f.key() + "\"");
      FixtureSteps steps;
      steps.setup = get_string(*f, "setup", path);
      steps.teardown = get_string(*f, "teardown", path);
      config.fixtures[f.key()] = steps;
    }
  }
  if (auto it = doc.find("metric_orientation"); it != doc.end()) {
    if (!it->is_object()) {
      throw ConfigError(path + ": key \"metric_orientation\" must be an object");
    }
    for (auto m = it->begin(); m != it->end(); ++m) {
      const std::string v = m->is_string() ? m->get<std::string>() : "";
      if (v == "higher") {
        config.metric_orientation[m.key()] =
            MetricOrientation::higher_is_better;
      } else if (v == "lower") {
        config.metric_orientation[m.key()] =
            MetricOrientation::lower_is_better;
      } else {
        throw ConfigError(path + ": metric_orientation \"" + m.key() +
                          "\" must be \"higher\" or \"lower\"");
      }
    }
  }
  return config;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  const json doc = load_json_file(path);
  reject_unknown_keys(doc,
                      {"prefix", "usecase", "variant", "jube_file", "machine",
                       "queue", "project", "budget", "fixture", "record",
                       "in_command", "harness"},
                      path);

  ExperimentSpec spec;
  spec.prefix = get_string(doc, "prefix", path);
  spec.usecase = get_string(doc, "usecase", path);
  spec.variant = get_string(doc, "variant", path);
  spec.definition_path = get_string(doc, "jube_file", path);
  spec.machine = get_string(doc, "machine", path);
  spec.queue = get_string(doc, "queue", path);
  spec.project = get_string(doc, "project", path);
  spec.budget = get_string(doc, "budget", path);
  spec.fixture = get_string(doc, "fixture", path);
  spec.record = get_flag(doc, "record", path);
  spec.in_command = get_string(doc, "in_command", path);

  const std::string harness =
      get_string(doc, "harness", path, "builtin_logmap");
  if (harness == "builtin_logmap") {
    spec.harness_kind = HarnessKind::builtin_logmap;
  } else if (harness == "jube_csv" || harness == "jube") {
    spec.harness_kind = HarnessKind::jube_csv;
  } else {
    throw ConfigError(path + ": unknown harness \"" + harness +
                      "\" (expected builtin_logmap or jube_csv)");
  }
  return spec;
}

}  // namespace exacb
