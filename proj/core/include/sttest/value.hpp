#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "sttest/types.hpp"

namespace sttest {

/// Milliseconds; the runtime representation of TIME.
struct Duration {
  std::int64_t ms = 0;
  friend auto operator<=>(const Duration&, const Duration&) = default;
};

/// Dynamically tagged elementary value. Integers are stored at their exact
/// width; arithmetic helpers wrap two's-complement at that width.
class Value {
 public:
  Value() : data_(false) {}

  static Value boolean(bool v) { return Value(v); }
  static Value byte(std::uint8_t v) { return Value(v); }
  static Value word(std::uint16_t v) { return Value(v); }
  static Value int16(std::int16_t v) { return Value(v); }
  static Value dint(std::int32_t v) { return Value(v); }
  static Value real(float v) { return Value(v); }
  static Value lreal(double v) { return Value(v); }
  static Value time(std::int64_t ms) { return Value(Duration{ms}); }
  static Value string(std::string v) { return Value(std::move(v)); }

  /// Default value of an elementary kind (FALSE, 0, T#0s, '').
  static Value zero(TypeKind kind);
  /// Integer/bit-string/BOOL/TIME value of `kind` from `v`, wrapped to width.
  static Value wrapped(TypeKind kind, std::int64_t v);
  /// REAL/LREAL value of `kind` from `v` (REAL rounds to binary32).
  static Value floating(TypeKind kind, double v);

  TypeKind kind() const;

  bool as_bool() const { return std::get<bool>(data_); }
  /// Integer view of BOOL, BYTE, WORD, INT, DINT and TIME values.
  std::int64_t as_int() const;
  /// Numeric view of every non-string kind.
  double as_real() const;
  const std::string& as_string() const { return std::get<std::string>(data_); }

  /// IEC literal text: TRUE, -5, 255, 1.5, T#400ms, 'a$'b'. Integers print in decimal.
  std::string to_literal() const;
  /// Plain text used in reports and CSV: TRUE, -5, 1.5, T#400ms, abc.
  std::string to_display() const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  using Data = std::variant<bool, std::uint8_t, std::uint16_t, std::int16_t, std::int32_t, float,
                            double, Duration, std::string>;
  template <typename T>
  explicit Value(T v) : data_(std::move(v)) {}

  Data data_;
};

/// Shortest real literal that round-trips to `v` and always contains '.' or 'E'.
std::string format_real_literal(double v);
/// `T#<ms>ms`; negative durations print as `T#-<ms>ms`.
std::string format_time_literal(std::int64_t ms);
/// Single-quoted ST string with $-escapes.
std::string quote_st_string(std::string_view s);

/// Parses literal text for a declared elementary type, as written in CSV
/// cells: TRUE/FALSE/1/0 for BOOL, decimal or based integers, reals, IEC
/// time literals or bare milliseconds for TIME, quoted or bare strings.
/// Returns nullopt with `error` set when the text does not fit the type.
std::optional<Value> parse_value_literal(std::string_view text, const Type& type, std::string& error);

}  // namespace sttest
