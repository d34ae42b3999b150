#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ccm/common.hpp"

namespace ccm {

// Minimal delimited-table support: comma separated, UTF-8, one header row.
// Fields containing commas or quotes use standard double-quote escaping.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }

  std::size_t column(const std::string& name, const std::string& file) const {
    auto idx = find_column(name);
    if (!idx)
      fail(ErrorKind::Schema,
           "column '" + name + "' not found in " + file);
    return *idx;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

inline Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open file: " + path);
  Table table;
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::Schema, "empty file (no header row): " + path);
  table.header = detail::split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(detail::split_csv_line(line));
    if (table.rows.back().size() != table.header.size())
      fail(ErrorKind::Schema,
           "row " + std::to_string(table.rows.size()) + " of " + path +
               " has " + std::to_string(table.rows.back().size()) +
               " fields, expected " + std::to_string(table.header.size()));
  }
  return table;
}

inline void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write file: " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << detail::csv_escape(table.header[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << detail::csv_escape(row[i]);
    }
    out << '\n';
  }
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos != s.size())
      fail(ErrorKind::Mapping, "trailing characters in number '" + s +
                                   "' (" + context + ")");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::Mapping, "cannot parse '" + s + "' as a number (" +
                                 context + ")");
  }
}

// Fixed-precision formatting used by all emitted result tables so that
// identical runs are byte-identical.
inline std::string format_double(double v, int precision = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace ccm
