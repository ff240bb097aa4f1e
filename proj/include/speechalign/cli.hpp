#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace speechalign::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInvariant = 3;

// Runs one invocation; args excludes the program name. Diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace speechalign::cli
