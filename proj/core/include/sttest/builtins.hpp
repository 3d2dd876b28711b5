#pragma once

#include <optional>
#include <string_view>
#include <utility>

#include "sttest/program.hpp"

namespace sttest {

enum class BuiltinFnId {
  Abs, Min, Max, Limit, Sel, Mux,
  Sin, Cos, Tan, Asin, Acos, Atan, Exp, Ln, Log, Sqrt, Expt, Trunc,
  Shl, Shr, Rol, Ror,
  Concat, Len, Mid, Left, Right, Find,
  PlcMs,
  Convert,
};

struct BuiltinFunction {
  BuiltinFnId id;
  std::string_view name;
};

/// Standard function by upper-case name. `X_TO_Y` conversions between
/// elementary types all map to the shared Convert entry.
const BuiltinFunction* find_builtin_function(std::string_view name);

/// (from, to) for a conversion function name such as "INT_TO_REAL".
std::optional<std::pair<TypeKind, TypeKind>> conversion_kinds(std::string_view name);

/// Standard function block (TON, TOF, TP, R_TRIG, F_TRIG, CTU, CTD).
const PouInfo* find_builtin_fb(std::string_view name);

}  // namespace sttest
