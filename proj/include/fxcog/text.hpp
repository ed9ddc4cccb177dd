#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers and writers.
namespace fxcog::text {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);
// Fixed decimal places, for human-facing tables.
std::string format_fixed(double v, int decimals);

// Finite values only; trailing garbage, nan and inf yield nullopt.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);
// Writes through a temporary and renames into place.
void write_file_atomic(const std::string& path, std::string_view contents);

// FNV-1a 64-bit, rendered as 16 hex digits. Used for provenance stamps.
std::string fnv1a_hex(std::string_view data);

// Boxed plain-text table with right-aligned cells.
std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

} // namespace fxcog::text
