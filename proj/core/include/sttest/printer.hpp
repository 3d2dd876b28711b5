#pragma once

#include <string>

#include "sttest/ast.hpp"

namespace sttest {

/// Canonical ST rendering. Re-parsing the output yields a structurally
/// identical Ast (same dump()).
std::string print(const Ast& ast);
std::string print_expr(const Expr& e);

/// Span-insensitive S-expression dump. Two Asts are structurally equal iff
/// their dumps are equal. Resolved types are included when present.
std::string dump(const Ast& ast);

}  // namespace sttest
