#pragma once

#include <cstdlib>
#include <string>

#include "exacb/config.hpp"
#include "exacb/store.hpp"

namespace exacb::cli {

// Store selection precedence: --store flag, then config file, then
// EXACB_STORE_PATH, then ./exacb-store.
struct ToolContext {
  CliConfig config;
  std::string store_flag;
  std::string out_dir = "exacb-out";

  ResultStore resolve_store() const {
    if (!store_flag.empty()) return open_store(store_flag);
    if (config.store_uri) return open_store(*config.store_uri);
    if (const char* env = std::getenv("EXACB_STORE_PATH"); env && *env) {
      return open_store(env);
    }
    return open_store("exacb-store");
  }
};

// Exit-code taxonomy: 0 success, 1 benchmark/validation failure,
// 2 configuration/usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

}  // namespace exacb::cli
