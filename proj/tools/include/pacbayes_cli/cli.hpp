#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pacbayes::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation. `args` excludes the program name, so args[0] is the
/// subcommand. CSV goes to --out or `out`; diagnostics and usage go to `err`.
/// Returns 0 on success, 1 when a check evaluated during the run fails, and 2
/// on usage or configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Entry point for main().
int run(int argc, char** argv);

}  // namespace pacbayes::cli
