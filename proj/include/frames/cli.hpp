#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace frames::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

// Entry point for `frames <subcommand> ...`. `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace frames::cli
