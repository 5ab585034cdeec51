#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tacticrl {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one subcommand. Returns the process exit status: 0 on success,
/// 2 for configuration or usage errors, 3 for missing inputs, 4 for corrupt
/// or mismatched inputs, 1 otherwise. Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tacticrl
