#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inspectrl::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kDataError = 1,
  kInputFormatError = 2,
  kProviderError = 3,
};

inline constexpr const char* kEnvPrefix = "INSPECTRL_";

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`; diagnostics, warnings and the resolved configuration go to
/// `err`. Options read from --config only apply where neither the flag nor
/// its INSPECTRL_* environment variable is set.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inspectrl::cli
