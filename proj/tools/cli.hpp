#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tkgx::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs one invocation; args exclude the program name. Messages go to `out` / `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tkgx::cli
