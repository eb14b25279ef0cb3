#pragma once

// Minimal RFC-4180 reader and writer. Quoted fields may contain commas,
// doubled quotes and line breaks; CRLF and LF line endings are accepted.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace delib::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of a header column, or npos.
  std::size_t column(std::string_view name) const noexcept;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Parses text. Throws Error(MalformedRow) on unterminated quotes or on
/// records whose field count differs from the header.
Table parse(std::string_view text);

Table read_file(const std::filesystem::path& path);

/// Throws Error(MalformedRow) unless the header contains every required column.
void require_columns(const Table& table, const std::vector<std::string_view>& required,
                     std::string_view what);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace delib::csv
