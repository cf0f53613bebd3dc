#pragma once

#include <map>
#include <optional>
#include <string>

#include "exacb/analysis.hpp"
#include "exacb/orchestrator.hpp"

namespace exacb {

// Tool-level configuration (--config). All fields optional; command-line
// flags and environment variables take precedence where they overlap.
struct CliConfig {
  std::optional<std::string> store_uri;
  std::string harness_command;  // must contain {definition} and {tags}
  std::map<std::string, FixtureSteps> fixtures;
  std::map<std::string, MetricOrientation> metric_orientation;

  MetricOrientation orientation_for(const std::string& label) const {
    auto it = metric_orientation.find(label);
    if (it != metric_orientation.end()) return it->second;
    return MetricOrientation::lower_is_better;  // runtime-like default
  }
};

CliConfig load_cli_config(const std::string& path);

// Declarative experiment file for `run`. Keys: prefix, usecase, variant,
// jube_file (-> definition_path), machine, queue, project, budget, fixture,
// record, in_command, harness. Unknown keys are rejected by name.
ExperimentSpec load_experiment_spec(const std::string& path);

}  // namespace exacb
