#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boxguard {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInputError = 2,
  kExitSpecFails = 3,
  kExitSpecUnknown = 4,
};

/// Runs one CLI invocation. `args` excludes the program name.
int cli_dispatch(const std::vector<std::string> &args, std::ostream &out,
                 std::ostream &err);

} // namespace boxguard
