#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clusterfdr::cli {

// Exit-code contract shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kUsage = 2,
  kValidationFailed = 3,
};

// Runs the command line `args` (args[0] is the program name). Normal output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clusterfdr::cli
