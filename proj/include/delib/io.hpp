#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace delib::io {

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

/// Fixed-point with the given number of decimals.
std::string format_fixed(double value, int decimals);

/// Parses a finite double; nullopt for "NA" or an empty token.
std::optional<double> parse_optional_number(std::string_view token);

/// Throws Error(MalformedRow) on failure.
double parse_number(std::string_view token, std::string_view what);
long parse_integer(std::string_view token, std::string_view what);

std::string read_text(const std::filesystem::path& path);

/// Writes atomically enough for a CLI: to a sibling temp file, then rename.
void write_text(const std::filesystem::path& path, std::string_view text);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace delib::io
