#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace roylab::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kRuntimeError = 3,
  kIoError = 4,
};

/// Runs one command line (args excludes the program name) and returns the exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roylab::cli
