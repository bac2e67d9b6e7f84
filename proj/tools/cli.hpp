#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace distq::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3 };

/// Entry point of the `distq` tool. Artifacts and reports go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience wrapper taking the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace distq::cli
