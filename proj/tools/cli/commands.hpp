#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aura::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;

/// Runs one `aura` invocation. `args` excludes the program name. Returns the
/// process exit status: 0 success, 1 internal error, 2 invalid input/config.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aura::cli
