#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace laburst {

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

std::string ascii_lower(std::string_view s);

// RFC 4180-style escaping: quotes a field when it contains a comma, quote,
// or newline.
std::string csv_escape(std::string_view field);
std::vector<std::string> csv_split(std::string_view line);

// Accepts "YYYY-MM-DD HH:MM:SS" or "YYYY-MM-DDTHH:MM:SS" with optional
// trailing "Z"; interpreted as UTC.
std::optional<std::int64_t> parse_iso8601(std::string_view s);

// Whole-string integer parse; rejects trailing garbage.
std::optional<std::int64_t> parse_int(std::string_view s);

std::vector<std::string> read_lines(const std::string& path);

}  // namespace laburst
