#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdlab::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailure = 1,
  kExitConfigError = 2,
  kExitCapacityError = 3,
};

/// Entry point of the `cdlab` tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdlab::app
