#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace sttest {

struct PouInfo;

enum class TypeKind : std::uint8_t {
  Void,
  Bool,
  Byte,
  Word,
  Int,
  DInt,
  Real,
  LReal,
  Time,
  String,
  Array,
  Instance,
  // untyped constant expressions, settled by context
  AnyInt,
  AnyReal,
};

inline constexpr std::uint32_t kDefaultStringLength = 80;
inline constexpr std::uint32_t kMaxStringLength = 65535;

/// A resolved ST type. Value-semantic; arrays are one-dimensional.
struct Type {
  TypeKind kind = TypeKind::Void;
  std::uint32_t length = 0;  // STRING capacity
  std::int64_t lower = 0;    // ARRAY bounds, inclusive
  std::int64_t upper = -1;
  std::shared_ptr<const Type> element;
  const PouInfo* pou = nullptr;  // Instance

  static Type of(TypeKind k) {
    Type t;
    t.kind = k;
    return t;
  }
  static Type string(std::uint32_t len = kDefaultStringLength) {
    Type t = of(TypeKind::String);
    t.length = len;
    return t;
  }
  static Type array(std::int64_t lo, std::int64_t hi, Type elem) {
    Type t = of(TypeKind::Array);
    t.lower = lo;
    t.upper = hi;
    t.element = std::make_shared<const Type>(std::move(elem));
    return t;
  }
  static Type instance(const PouInfo* pou) {
    Type t = of(TypeKind::Instance);
    t.pou = pou;
    return t;
  }

  bool is(TypeKind k) const { return kind == k; }
  std::int64_t array_size() const { return upper - lower + 1; }
};

bool is_elementary(TypeKind k);
bool is_integer(TypeKind k);   // INT, DINT, AnyInt
bool is_bit_string(TypeKind k);  // BYTE, WORD
bool is_real(TypeKind k);      // REAL, LREAL, AnyReal
bool is_numeric(TypeKind k);   // integer or real
bool is_constant_kind(TypeKind k);  // AnyInt / AnyReal

/// Same kind; arrays compare element type and bounds; instances compare POU.
/// STRING capacities are ignored (assignment truncates).
bool same_type(const Type& a, const Type& b);

/// Widening along INT->DINT, REAL->LREAL, BYTE->WORD (and identity).
bool widens_to(TypeKind from, TypeKind to);

/// Closed integer range representable by an integer or bit-string kind.
std::pair<std::int64_t, std::int64_t> integer_range(TypeKind k);

/// Elementary kind from an upper-case IEC name ("INT", "LREAL", ...).
std::optional<TypeKind> elementary_from_name(std::string_view upper);

std::string_view kind_name(TypeKind k);
std::string type_name(const Type& t);

}  // namespace sttest
