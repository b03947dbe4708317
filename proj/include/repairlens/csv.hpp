#pragma once

// Minimal RFC-4180 reader/writer. Quoted fields may contain commas, quotes
// and newlines; CRLF input is accepted, output always uses LF.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repairlens/error.hpp"

namespace repairlens::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line where each row starts

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

inline std::vector<Row> parse_records(std::string_view text, std::vector<std::size_t>* lines = nullptr) {
  std::vector<Row> records;
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);

  std::size_t i = 0;
  std::size_t line = 1;
  while (i < text.size()) {
    Row row;
    std::string field;
    const std::size_t row_line = line;
    bool row_done = false;
    while (!row_done) {
      field.clear();
      if (i < text.size() && text[i] == '"') {
        const std::size_t open_line = line;
        ++i;
        bool closed = false;
        while (i < text.size()) {
          char c = text[i];
          if (c == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed)
          throw Error(ErrorKind::MalformedInput,
                      "unterminated quoted field starting at line " + std::to_string(open_line));
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw Error(ErrorKind::MalformedInput,
                      "unexpected character after closing quote at line " + std::to_string(line));
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"')
            throw Error(ErrorKind::MalformedInput,
                        "bare quote in unquoted field at line " + std::to_string(line));
          field.push_back(text[i]);
          ++i;
        }
      }
      row.push_back(field);
      if (i >= text.size()) {
        row_done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < text.size() && text[i] == '\n') ++i;
        ++line;
        row_done = true;
      }
    }
    // a lone empty line carries no record
    if (row.size() == 1 && row[0].empty()) continue;
    records.push_back(std::move(row));
    if (lines) lines->push_back(row_line);
  }
  return records;
}

// First record is the header. Every row must have the header's width.
inline Table parse(std::string_view text) {
  Table table;
  std::vector<std::size_t> lines;
  auto records = parse_records(text, &lines);
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw Error(ErrorKind::MalformedInput,
                  "line " + std::to_string(lines[r]) + ": expected " + std::to_string(table.header.size()) +
                      " fields, found " + std::to_string(records[r].size()));
    table.rows.push_back(std::move(records[r]));
    table.row_lines.push_back(lines[r]);
  }
  return table;
}

inline std::string escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void append_row(std::string& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(row[i]);
  }
  out.push_back('\n');
}

inline std::string write(const Row& header, const std::vector<Row>& rows) {
  std::string out;
  append_row(out, header);
  for (const auto& r : rows) append_row(out, r);
  return out;
}

}  // namespace repairlens::csv
