#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdv/errors.hpp"

namespace sdv {

/// Parsed CSV document: header row plus data rows, all cells as raw strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 reader: quoted fields, "" escapes, embedded commas and newlines,
/// LF or CRLF records, optional trailing newline. Every data row must have
/// the header's arity. An empty field is the null marker upstream.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty()) {
      table.header = std::move(record);
    } else {
      if (record.size() != table.header.size())
        throw ParseError("CSV row has " + std::to_string(record.size()) + " fields, header has " +
                             std::to_string(table.header.size()),
                         line, 1);
      table.rows.push_back(std::move(record));
    }
    record.clear();
  };

  size_t i = 0;
  bool any = false;
  while (i < text.size()) {
    char c = text[i];
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      if (c == '\n') ++line;
      field += c;
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw ParseError("stray quote inside unquoted CSV field", line, 1);
        in_quotes = true;
        field_was_quoted = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        ++i;
        break;
      case '\n':
        end_record();
        ++line;
        ++i;
        break;
      default:
        field += c;
        ++i;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted CSV field", line, 1);
  if (any && (!field.empty() || field_was_quoted || !record.empty())) end_record();
  return table;
}

inline std::string csv_escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// One LF-terminated CSV record.
inline std::string csv_row(std::span<const std::string> fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

} // namespace sdv
