#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hazardforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;

/// `args` excludes the program name. Primary output goes to --output or
/// `out`; diagnostics go to `err` as one `error kind=... exit=... message=...` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64-bit, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace hazardforge::cli
