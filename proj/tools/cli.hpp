#pragma once

// tsr-sim command dispatcher, kept separate from main() so tests can drive it
// in-process.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tsr::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalFailure = 3,
  kIoError = 4,
};

/// `args` excludes the program name. Data goes to the configured output file
/// or to `out`; human-readable reports and diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, used to fingerprint the physical parameters in output headers.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

}  // namespace tsr::cli
