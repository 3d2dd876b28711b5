#include "sttest/value.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "sttest/lexer.hpp"

namespace sttest {

Value Value::zero(TypeKind kind) {
  switch (kind) {
    case TypeKind::Real: return real(0.0f);
    case TypeKind::LReal: return lreal(0.0);
    case TypeKind::String: return string({});
    default: return wrapped(kind, 0);
  }
}

Value Value::wrapped(TypeKind kind, std::int64_t v) {
  const auto u = static_cast<std::uint64_t>(v);
  switch (kind) {
    case TypeKind::Bool: return boolean(v != 0);
    case TypeKind::Byte: return byte(static_cast<std::uint8_t>(u));
    case TypeKind::Word: return word(static_cast<std::uint16_t>(u));
    case TypeKind::Int: return int16(static_cast<std::int16_t>(static_cast<std::uint16_t>(u)));
    case TypeKind::DInt: return dint(static_cast<std::int32_t>(static_cast<std::uint32_t>(u)));
    case TypeKind::Time: return time(v);
    case TypeKind::Real: return real(static_cast<float>(v));
    case TypeKind::LReal: return lreal(static_cast<double>(v));
    default: return Value();
  }
}

Value Value::floating(TypeKind kind, double v) {
  return kind == TypeKind::Real ? real(static_cast<float>(v)) : lreal(v);
}

TypeKind Value::kind() const {
  static constexpr TypeKind kinds[] = {TypeKind::Bool, TypeKind::Byte,  TypeKind::Word,
                                       TypeKind::Int,  TypeKind::DInt,  TypeKind::Real,
                                       TypeKind::LReal, TypeKind::Time, TypeKind::String};
  return kinds[data_.index()];
}

std::int64_t Value::as_int() const {
  return std::visit(
      [](const auto& v) -> std::int64_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Duration>) return v.ms;
        else if constexpr (std::is_same_v<T, std::string>) return 0;
        else if constexpr (std::is_floating_point_v<T>) return static_cast<std::int64_t>(v);
        else return static_cast<std::int64_t>(v);
      },
      data_);
}

double Value::as_real() const {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Duration>) return static_cast<double>(v.ms);
        else if constexpr (std::is_same_v<T, std::string>) return 0.0;
        else return static_cast<double>(v);
      },
      data_);
}

std::string format_real_literal(double v) {
  if (std::isnan(v)) return "NAN";
  if (std::isinf(v)) return v > 0 ? "INF" : "-INF";
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*G", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s = buf;
  const auto e = s.find('E');
  std::string mantissa = s.substr(0, e);
  if (mantissa.find('.') == std::string::npos) mantissa += ".0";
  if (e == std::string::npos) return mantissa;
  // "E-05" -> "E-5"
  std::string exponent = s.substr(e + 1);
  const char sign = exponent[0] == '-' ? '-' : '\0';
  std::size_t i = (exponent[0] == '-' || exponent[0] == '+') ? 1 : 0;
  while (i + 1 < exponent.size() && exponent[i] == '0') ++i;
  return mantissa + "E" + (sign ? std::string(1, sign) : std::string()) + exponent.substr(i);
}

std::string format_time_literal(std::int64_t ms) {
  return ms < 0 ? "T#-" + std::to_string(-ms) + "ms" : "T#" + std::to_string(ms) + "ms";
}

std::string quote_st_string(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    switch (c) {
      case '$': out += "$$"; break;
      case '\'': out += "$'"; break;
      case '\n': out += "$N"; break;
      case '\r': out += "$R"; break;
      case '\t': out += "$T"; break;
      case '\f': out += "$P"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[4];
          std::snprintf(buf, sizeof buf, "$%02X", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('\'');
  return out;
}

std::string Value::to_literal() const {
  switch (kind()) {
    case TypeKind::Bool: return as_bool() ? "TRUE" : "FALSE";
    case TypeKind::Real: return format_real_literal(static_cast<double>(std::get<float>(data_)));
    case TypeKind::LReal: return format_real_literal(std::get<double>(data_));
    case TypeKind::Time: return format_time_literal(as_int());
    case TypeKind::String: return quote_st_string(as_string());
    default: return std::to_string(as_int());
  }
}

std::string Value::to_display() const {
  if (kind() == TypeKind::String) return as_string();
  if (kind() == TypeKind::Real) {
    // shortest text that round-trips through binary32
    const float f = std::get<float>(data_);
    char buf[64];
    for (int precision = 1; precision <= 9; ++precision) {
      std::snprintf(buf, sizeof buf, "%.*G", precision, static_cast<double>(f));
      if (std::strtof(buf, nullptr) == f) break;
    }
    return buf;
  }
  if (kind() == TypeKind::LReal) {
    char buf[64];
    const double d = std::get<double>(data_);
    for (int precision = 1; precision <= 17; ++precision) {
      std::snprintf(buf, sizeof buf, "%.*G", precision, d);
      if (std::strtod(buf, nullptr) == d) break;
    }
    return buf;
  }
  return to_literal();
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool parse_integer_text(std::string_view text, std::int64_t& out) {
  std::string s;
  for (char c : text) {
    if (c != '_') s.push_back(c);
  }
  if (s.empty()) return false;
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    i = 1;
  }
  int base = 10;
  if (auto hash = s.find('#'); hash != std::string::npos) {
    const auto prefix = s.substr(i, hash - i);
    if (prefix == "16") base = 16;
    else if (prefix == "8") base = 8;
    else if (prefix == "2") base = 2;
    else return false;
    i = hash + 1;
  }
  if (i >= s.size()) return false;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), value, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  if (value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) return false;
  out = negative ? -static_cast<std::int64_t>(value) : static_cast<std::int64_t>(value);
  return true;
}

bool parse_real_text(std::string_view text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

std::optional<Value> parse_value_literal(std::string_view raw, const Type& type, std::string& error) {
  const std::string text = type.kind == TypeKind::String ? std::string(raw) : trim(raw);
  switch (type.kind) {
    case TypeKind::Bool: {
      const auto u = upper(text);
      if (u == "TRUE" || u == "1") return Value::boolean(true);
      if (u == "FALSE" || u == "0") return Value::boolean(false);
      error = "expected BOOL (TRUE/FALSE/1/0), got '" + text + "'";
      return std::nullopt;
    }
    case TypeKind::Byte:
    case TypeKind::Word:
    case TypeKind::Int:
    case TypeKind::DInt: {
      std::int64_t v = 0;
      if (!parse_integer_text(text, v)) {
        error = "expected " + std::string(kind_name(type.kind)) + " integer, got '" + text + "'";
        return std::nullopt;
      }
      const auto [lo, hi] = integer_range(type.kind);
      if (v < lo || v > hi) {
        error = "value " + text + " out of " + std::string(kind_name(type.kind)) + " range " +
                std::to_string(lo) + ".." + std::to_string(hi);
        return std::nullopt;
      }
      return Value::wrapped(type.kind, v);
    }
    case TypeKind::Real:
    case TypeKind::LReal: {
      double v = 0.0;
      if (!parse_real_text(text, v)) {
        error = "expected " + std::string(kind_name(type.kind)) + " number, got '" + text + "'";
        return std::nullopt;
      }
      if (type.kind == TypeKind::Real && std::fabs(v) > std::numeric_limits<float>::max()) {
        error = "value " + text + " out of REAL range";
        return std::nullopt;
      }
      return Value::floating(type.kind, v);
    }
    case TypeKind::Time: {
      std::int64_t ms = 0;
      const auto u = upper(text);
      if (u.rfind("T#", 0) == 0 || u.rfind("TIME#", 0) == 0) {
        if (parse_duration_ms(u.substr(u.find('#') + 1), ms)) return Value::time(ms);
      } else if (parse_integer_text(text, ms) && ms >= 0) {
        return Value::time(ms);
      }
      error = "expected TIME (T#... or non-negative milliseconds), got '" + text + "'";
      return std::nullopt;
    }
    case TypeKind::String: {
      std::string value = text;
      const std::string t = trim(text);
      if (t.size() >= 2 && t.front() == '\'' && t.back() == '\'') {
        if (!decode_st_string(std::string_view(t).substr(1, t.size() - 2), value)) {
          error = "invalid escape in string literal " + t;
          return std::nullopt;
        }
      }
      if (value.size() > type.length) {
        error = "string of length " + std::to_string(value.size()) + " exceeds capacity " +
                std::to_string(type.length);
        return std::nullopt;
      }
      return Value::string(std::move(value));
    }
    default:
      error = "type " + type_name(type) + " has no literal form";
      return std::nullopt;
  }
}

}  // namespace sttest
