#pragma once

#include <string>
#include <vector>

#include "sttest/ast.hpp"
#include "sttest/lexer.hpp"

namespace sttest {

/// Recursive-descent parser for the supported Structured Text subset.
/// StatementIds are assigned densely in source order. On failure throws
/// CompileError(Phase::Parse) listing every syntax error found; recovery
/// skips to the next `;` or section keyword.
Ast parse(const std::vector<Token>& tokens, std::string origin = {});

/// tokenize + parse.
Ast parse_source(const SourceUnit& src);

}  // namespace sttest
