#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace intimacy::csv {

// RFC 4180 reader: quoted fields may contain commas, quotes ("") and newlines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. Blank lines are skipped.
  std::optional<std::vector<std::string>> next();
  // 1-based line number where the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row

  // Column index by name; throws Error("missing_column") when absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

Table read_file(const std::string& path);
Table read_stream(std::istream& in, const std::string& source_name);

std::string escape(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

// Shortest round-trip-free fixed formatting used by every numeric CSV writer.
std::string format_double(double v, int precision = 6);

}  // namespace intimacy::csv
