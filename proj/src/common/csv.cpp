#include "intimacy/common/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "intimacy/common/error.hpp"

namespace intimacy::csv {

std::optional<std::vector<std::string>> Reader::next() {
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  record_line_ = line_;

  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (!quoted) break;
      // Quoted field spans a newline.
      std::string more;
      if (!std::getline(in_, more))
        throw Error("parse_error", "unterminated quoted field starting at line " +
                                       std::to_string(record_line_));
      ++line_;
      if (!more.empty() && more.back() == '\r') more.pop_back();
      field.push_back('\n');
      line = std::move(more);
      i = 0;
      continue;
    }
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
    ++i;
  }
  fields.push_back(std::move(field));
  return fields;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw Error("missing_column", "required column '" + std::string(name) + "' not found");
}

Table read_stream(std::istream& in, const std::string& source_name) {
  Reader reader(in);
  Table table;
  auto header = reader.next();
  if (!header) return table;
  table.header = std::move(*header);
  while (auto row = reader.next()) {
    if (row->size() != table.header.size())
      throw Error("parse_error", source_name + ":" + std::to_string(reader.line()) +
                                     ": expected " + std::to_string(table.header.size()) +
                                     " fields, got " + std::to_string(row->size()));
    table.rows.push_back(std::move(*row));
    table.lines.push_back(reader.line());
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  return read_stream(in, path);
}

std::string escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    // Normalize negative zero so byte-identical reruns do not depend on sign bits.
    if (s[0] == '-') s.erase(0, 1);
  }
  return s;
}

}  // namespace intimacy::csv
