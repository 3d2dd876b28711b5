#include "sttest/types.hpp"

#include <limits>

#include "sttest/program.hpp"

namespace sttest {

bool is_elementary(TypeKind k) { return k >= TypeKind::Bool && k <= TypeKind::String; }
bool is_integer(TypeKind k) {
  return k == TypeKind::Int || k == TypeKind::DInt || k == TypeKind::AnyInt;
}
bool is_bit_string(TypeKind k) { return k == TypeKind::Byte || k == TypeKind::Word; }
bool is_real(TypeKind k) {
  return k == TypeKind::Real || k == TypeKind::LReal || k == TypeKind::AnyReal;
}
bool is_numeric(TypeKind k) { return is_integer(k) || is_real(k); }
bool is_constant_kind(TypeKind k) { return k == TypeKind::AnyInt || k == TypeKind::AnyReal; }

bool same_type(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Array:
      return a.lower == b.lower && a.upper == b.upper && a.element && b.element &&
             same_type(*a.element, *b.element);
    case TypeKind::Instance:
      return a.pou == b.pou;
    default:
      return true;
  }
}

bool widens_to(TypeKind from, TypeKind to) {
  if (from == to) return true;
  return (from == TypeKind::Int && to == TypeKind::DInt) ||
         (from == TypeKind::Real && to == TypeKind::LReal) ||
         (from == TypeKind::Byte && to == TypeKind::Word);
}

std::pair<std::int64_t, std::int64_t> integer_range(TypeKind k) {
  switch (k) {
    case TypeKind::Bool: return {0, 1};
    case TypeKind::Byte: return {0, 255};
    case TypeKind::Word: return {0, 65535};
    case TypeKind::Int: return {-32768, 32767};
    case TypeKind::DInt: return {std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max()};
    default: return {std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max()};
  }
}

std::optional<TypeKind> elementary_from_name(std::string_view upper) {
  if (upper == "BOOL") return TypeKind::Bool;
  if (upper == "BYTE") return TypeKind::Byte;
  if (upper == "WORD") return TypeKind::Word;
  if (upper == "INT") return TypeKind::Int;
  if (upper == "DINT") return TypeKind::DInt;
  if (upper == "REAL") return TypeKind::Real;
  if (upper == "LREAL") return TypeKind::LReal;
  if (upper == "TIME") return TypeKind::Time;
  if (upper == "STRING") return TypeKind::String;
  return std::nullopt;
}

std::string_view kind_name(TypeKind k) {
  switch (k) {
    case TypeKind::Void: return "VOID";
    case TypeKind::Bool: return "BOOL";
    case TypeKind::Byte: return "BYTE";
    case TypeKind::Word: return "WORD";
    case TypeKind::Int: return "INT";
    case TypeKind::DInt: return "DINT";
    case TypeKind::Real: return "REAL";
    case TypeKind::LReal: return "LREAL";
    case TypeKind::Time: return "TIME";
    case TypeKind::String: return "STRING";
    case TypeKind::Array: return "ARRAY";
    case TypeKind::Instance: return "INSTANCE";
    case TypeKind::AnyInt: return "ANY_INT";
    case TypeKind::AnyReal: return "ANY_REAL";
  }
  return "?";
}

std::string type_name(const Type& t) {
  switch (t.kind) {
    case TypeKind::String:
      return "STRING(" + std::to_string(t.length) + ")";
    case TypeKind::Array:
      return "ARRAY[" + std::to_string(t.lower) + ".." + std::to_string(t.upper) + "] OF " +
             (t.element ? type_name(*t.element) : "?");
    case TypeKind::Instance:
      return t.pou ? t.pou->name : "?";
    default:
      return std::string(kind_name(t.kind));
  }
}

}  // namespace sttest
