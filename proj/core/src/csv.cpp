#include "sttest/csv.hpp"

namespace sttest {

CsvError::CsvError(std::size_t row, std::size_t column, const std::string& message)
    : std::runtime_error("csv row " + std::to_string(row) +
                         (column ? ", column " + std::to_string(column) : std::string()) + ": " + message),
      row_(row),
      column_(column),
      message_(message) {}

std::vector<CsvRow> read_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t i = 0;
  std::size_t line = 1;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < text.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool quoted = false;
    bool blank = true;
    for (;;) {
      if (i >= text.size()) {
        row.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (c == '"' && field.empty() && !quoted) {
        // quoted field
        blank = false;
        quoted = true;
        ++i;
        for (;;) {
          if (i >= text.size()) throw CsvError(row.line, row.fields.size() + 1, "unterminated quoted field");
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          field += text[i++];
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw CsvError(row.line, row.fields.size() + 1, "text after closing quote");
        continue;
      }
      if (c == ',') {
        blank = false;
        row.fields.push_back(std::move(field));
        field.clear();
        quoted = false;
        ++i;
        continue;
      }
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (c == '\n' || c == '\r') {
        ++i;
        ++line;
        row.fields.push_back(std::move(field));
        break;
      }
      blank = false;
      field += c;
      ++i;
    }
    if (blank && row.fields.size() == 1 && row.fields[0].empty()) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out;
}

}  // namespace sttest
