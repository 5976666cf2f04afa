#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace mgb {

/// Shortest round-trip decimal text for a double ('.' separator, no locale).
std::string format_double(double v);

/// RFC-4180 style CSV: header row, comma separated, fields quoted only when
/// they contain a comma, quote or line break. Output is byte-for-byte
/// deterministic for identical input.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::vector<std::string> cells{to_cell(fields)...};
    write(cells);
  }

 private:
  static std::string to_cell(double v) { return format_double(v); }
  static std::string to_cell(long long v) { return std::to_string(v); }
  static std::string to_cell(int v) { return std::to_string(v); }
  static std::string to_cell(std::size_t v) { return std::to_string(v); }
  static std::string to_cell(std::string_view v) { return std::string(v); }
  static std::string to_cell(const std::string& v) { return v; }
  static std::string to_cell(const char* v) { return v; }

  void write(const std::vector<std::string>& cells);

  std::ofstream out_;
};

}  // namespace mgb
