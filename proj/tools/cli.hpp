#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nldd::cli {

/// Exit codes of the nldd tool.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kTraining = 4,
};

/// Runs one command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nldd::cli
