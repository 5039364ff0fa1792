#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ifmix {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Output goes to `out`,
/// diagnostics and usage text to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ifmix
