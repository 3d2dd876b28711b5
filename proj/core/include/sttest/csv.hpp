#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sttest {

/// Row is the 1-based source line of the record; column 0 means the whole row.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t row, std::size_t column, const std::string& message);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t row_;
  std::size_t column_;
  std::string message_;
};

struct CsvRow {
  std::size_t line = 0;  // source line the record starts on
  std::vector<std::string> fields;
};

/// RFC 4180 records: quoted fields may hold commas, quotes ("") and line
/// breaks. LF or CRLF. Blank lines are skipped. Throws CsvError.
std::vector<CsvRow> read_csv(std::string_view text);

/// Quotes fields containing separators, quotes, line breaks or edge spaces.
std::string csv_field(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace sttest
