#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace vsd::cli {

// Exit codes: 0 success, 1 resource or data error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitResource = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Results go to
// `out`; the reproducibility log (checksums, seed, config) and diagnostics
// go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vsd::cli
