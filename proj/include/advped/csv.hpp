#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace advped {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::filesystem::path& file, std::size_t row, const std::string& what);
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Comma-separated writer; throws std::runtime_error when the file cannot
/// be opened or a write fails.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(bool v) { return field(static_cast<long long>(v ? 1 : 0)); }
  CsvWriter& field(std::string_view v);
  // Without this a string literal would bind to the bool overload.
  CsvWriter& field(const char* v) { return field(std::string_view(v)); }
  void end_row();
  void flush();

 private:
  void sep();

  std::filesystem::path path_;
  std::ofstream out_;
  bool first_ = true;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws CsvError when absent.
  std::size_t column(std::string_view name) const;
  /// Column parsed as doubles; the offending row (1-based, header = 1) is
  /// named in the error.
  std::vector<double> numbers(std::string_view name) const;

  std::filesystem::path source;
};

/// Reads a header-plus-rows file. Rows with a field count different from
/// the header raise CsvError naming the row.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace advped
