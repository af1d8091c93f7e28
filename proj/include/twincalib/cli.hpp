#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace twincalib::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

/// Runs one command line (without the program name). Diagnostics go to `err`,
/// summaries and help text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "1..10" (inclusive) or "1,2,5".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace twincalib::cli
