#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spectraclass::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitUsage = 64;

/// Environment variable naming the default rule base.
inline constexpr const char* kRulesEnv = "SPECTRACLASS_RULES";

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit status. Normal output goes to `out`, diagnostics and
/// summaries to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spectraclass::cli
