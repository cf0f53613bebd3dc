#pragma once

#include <string>

#include "context.hpp"

namespace exacb::cli {

// `analyze <kind> <config>` with kind one of comparison, timeseries,
// scaling, energy. Writes result tables and SVG plots under out_dir,
// filenames prefixed by the config's prefix field.
int cmd_analyze(const std::string& kind, const std::string& config_path,
                const ToolContext& ctx);

}  // namespace exacb::cli
