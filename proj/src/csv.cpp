#include "delib/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "delib/error.hpp"

namespace delib::csv {

std::size_t Table::column(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return npos;
}

namespace {

// Splits into raw records; each record keeps the line it started on.
std::vector<Row> split_records(std::string_view text) {
  std::vector<Row> records;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto finish_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto finish_record = [&] {
    finish_field();
    // A blank line yields one empty field; skip it.
    if (!(current.fields.size() == 1 && current.fields[0].empty())) {
      records.push_back(std::move(current));
    }
    current = Row{};
    current.line = line;
  };

  std::size_t quote_line = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(ErrorCode::MalformedRow,
                      "line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        quote_line = line;
        break;
      case ',':
        finish_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        ++line;
        finish_record();
        break;
      case '\n':
        ++line;
        finish_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(quote_line) + ": unterminated quoted field");
  }
  if (field_started || !current.fields.empty()) finish_record();
  return records;
}

}  // namespace

Table parse(std::string_view text) {
  // Tolerate a UTF-8 byte order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = split_records(text);
  Table table;
  if (records.empty()) return table;
  table.header = std::move(records.front().fields);
  table.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != table.header.size()) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(records[r].line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(records[r].fields.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedRow, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void require_columns(const Table& table, const std::vector<std::string_view>& required,
                     std::string_view what) {
  if (table.header.empty()) {
    throw Error(ErrorCode::MalformedRow, std::string(what) + ": empty file (no header)");
  }
  for (auto name : required) {
    if (table.column(name) == npos) {
      throw Error(ErrorCode::MalformedRow,
                  std::string(what) + ": line 1: missing column '" + std::string(name) + "'");
    }
  }
}

std::string escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace delib::csv
