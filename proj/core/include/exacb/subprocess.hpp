#pragma once

#include <map>
#include <string>
#include <vector>

namespace exacb {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;

  bool ok() const { return exit_code == 0; }
};

struct ProcessOptions {
  std::string cwd;                          // empty: inherit
  std::map<std::string, std::string> env;   // additions/overrides
  std::string stdin_bytes;
};

// fork/exec with captured stdout+stderr. argv[0] is resolved via PATH.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& opts = {});

// Convenience for configuration-supplied command lines: /bin/sh -c cmd.
ProcessResult run_shell(const std::string& command,
                        const ProcessOptions& opts = {});

}  // namespace exacb
