#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace incomefit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int
{
  kSuccess = 0,
  kUsage = 1,
  kInputError = 2,
  kNotConverged = 3,
  kFitFailure = 4,
};

/// Runs one `incomefit` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace incomefit::cli
