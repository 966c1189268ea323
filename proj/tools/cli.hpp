#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mdsbm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageOrIo = 1,
  kNotConverged = 2,
  kInvalidData = 3,
};

/// Runs the command line `args` (without the program name). Results go to
/// files; summaries to `out`, errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdsbm::cli
