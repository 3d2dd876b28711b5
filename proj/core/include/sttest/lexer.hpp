#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sttest/source.hpp"

namespace sttest {

enum class TokenKind {
  Keyword,
  Identifier,
  IntegerLiteral,
  RealLiteral,
  TimeLiteral,
  StringLiteral,
  Operator,
  Punctuation,
  EndOfInput,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::EndOfInput;
  std::string lexeme;  // raw source slice
  std::string text;    // upper-cased for keywords/identifiers, decoded for strings
  Span span;
  std::int64_t int_value = 0;  // integer literal, or milliseconds for time literals
  double real_value = 0.0;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_keyword(std::string_view t) const { return is(TokenKind::Keyword, t); }
  bool is_op(std::string_view t) const {
    return (kind == TokenKind::Operator || kind == TokenKind::Punctuation) && text == t;
  }
};

bool is_keyword(std::string_view upper);

/// Throws CompileError(Phase::Lex) with every malformed token found.
/// The result always ends with an EndOfInput token.
std::vector<Token> tokenize(const SourceUnit& src);

/// Parses an IEC duration body such as "1s500ms" or "1.5h" (no T# prefix).
/// Returns false on malformed input.
bool parse_duration_ms(std::string_view body, std::int64_t& ms);

/// Decodes the inside of a single-quoted ST string ($-escapes).
bool decode_st_string(std::string_view body, std::string& out);

}  // namespace sttest
