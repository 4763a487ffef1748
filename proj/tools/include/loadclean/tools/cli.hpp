#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace loadclean::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Runs one `loadclean` invocation. `args` excludes the program name. Data goes
// to `out` or to files, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loadclean::tools
