#pragma once

// Reader and writer for the TOML subset used by config files: [table] and
// [a.b] headers, bare or quoted keys, dotted keys, basic and literal strings,
// integers, floats (including inf/nan), booleans, and (possibly multi-line)
// arrays. Inline tables, dates and multi-line strings are not supported.

#include <string>
#include <string_view>

#include <json.hpp>

namespace twincalib::toml {

/// Throws ConfigError "<source>:<line>: <message>" on malformed input.
nlohmann::json parse(std::string_view text, const std::string& source = "<input>");

/// Emits a table whose values are scalars, arrays of scalars, or nested
/// tables. Floats use the shortest round-trip form, so parse(emit(j)) == j.
std::string emit(const nlohmann::json& table);

}  // namespace twincalib::toml
