#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sttest {

/// 1-based line/column plus the byte offset it was computed from.
struct Position {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::uint32_t offset = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

struct Span {
  Position begin;
  Position end;

  friend bool operator==(const Span&, const Span&) = default;
};

/// Source text with a line-index table. Columns count UTF-8 code points.
class SourceUnit {
 public:
  SourceUnit() = default;
  SourceUnit(std::string text, std::string origin);

  static SourceUnit from_file(const std::string& path);

  const std::string& text() const { return text_; }
  const std::string& origin() const { return origin_; }

  /// Total over [0, text().size()]; offsets past the end clamp to the end.
  Position position_at(std::size_t offset) const;

  std::size_t line_count() const { return line_starts_.size(); }
  /// Text of a 1-based line without its terminator.
  std::string_view line_text(std::size_t line) const;

 private:
  std::string text_;
  std::string origin_;
  std::vector<std::uint32_t> line_starts_;
};

/// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(std::string_view text);

}  // namespace sttest
