#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kiefer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCriterionFailed = 1;
inline constexpr int kExitError = 2;

/// `args` excludes the program name. KIEFER_OUTPUT_DIR, when set, replaces
/// the output directory.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kiefer::cli
