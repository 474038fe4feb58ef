#pragma once

// Minimal RFC 4180 reader and writer.

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace urlspam::csv {

using Row = std::vector<std::string>;

/// Reads one record; returns false at end of input. Quoted fields may contain
/// commas, doubled quotes and line breaks. A bare CR before LF is dropped.
inline bool read_row(std::istream& in, Row& row) {
  row.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (int ch = in.get(); ; ch = in.get()) {
    if (ch == std::char_traits<char>::eof()) {
      row.push_back(std::move(field));
      return true;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      return true;
    } else if (c == '\r' && in.peek() == '\n') {
      // CRLF terminator
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << quote(row[i]);
  }
  out << "\r\n";
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace urlspam::csv
