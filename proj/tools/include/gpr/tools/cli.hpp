#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpr::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Runs `gpr-recon` on argv-style arguments (args[0] is the program name).
/// Never throws; failures map to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpr::tools
