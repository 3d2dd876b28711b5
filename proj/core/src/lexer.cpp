#include "sttest/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "sttest/diagnostic.hpp"

namespace sttest {

namespace {

constexpr std::array kKeywords = {
    "AND", "ARRAY", "BY", "CASE", "CONFIGURATION", "CONSTANT", "DO", "ELSE", "ELSIF",
    "END_CASE", "END_CONFIGURATION", "END_FOR", "END_FUNCTION", "END_FUNCTION_BLOCK",
    "END_IF", "END_PROGRAM", "END_REPEAT", "END_RESOURCE", "END_VAR", "END_WHILE", "EXIT",
    "FALSE", "FOR", "FUNCTION", "FUNCTION_BLOCK", "IF", "MOD", "NOT", "OF", "OR", "PROGRAM",
    "REPEAT", "RESOURCE", "RETAIN", "RETURN", "THEN", "TO", "TRUE", "UNTIL", "VAR",
    "VAR_INPUT", "VAR_IN_OUT", "VAR_OUTPUT", "VAR_TEMP", "WHILE", "XOR",
};

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

int digit_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return 99;
}

class Lexer {
 public:
  explicit Lexer(const SourceUnit& src) : src_(src), text_(src.text()) {}

  std::vector<Token> run() {
    if (auto bad = find_invalid_utf8(text_); bad != std::string_view::npos) {
      error(bad, bad + 1, "invalid UTF-8 sequence");
      throw CompileError(Phase::Lex, std::move(errors_), src_.origin());
    }
    while (true) {
      skip_trivia();
      if (pos_ >= text_.size()) break;
      lex_token();
    }
    Token eof;
    eof.kind = TokenKind::EndOfInput;
    eof.span = Span{src_.position_at(text_.size()), src_.position_at(text_.size())};
    tokens_.push_back(std::move(eof));
    if (!errors_.empty()) throw CompileError(Phase::Lex, std::move(errors_), src_.origin());
    return std::move(tokens_);
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void error(std::size_t begin, std::size_t end, std::string message) {
    errors_.push_back(Diagnostic{Phase::Lex, std::move(message),
                                 Span{src_.position_at(begin), src_.position_at(end)}, {}});
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      const char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '(' && peek(1) == '*') {
        skip_block_comment("*)");
      } else if (c == '/' && peek(1) == '*') {
        skip_block_comment("*/");
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void skip_block_comment(std::string_view close) {
    const std::size_t start = pos_;
    const auto end = text_.find(close, pos_ + 2);
    if (end == std::string_view::npos) {
      error(start, text_.size(), "unterminated comment");
      pos_ = text_.size();
      return;
    }
    pos_ = end + close.size();
  }

  void push(TokenKind kind, std::size_t begin, std::string text) {
    Token t;
    t.kind = kind;
    t.lexeme = std::string(text_.substr(begin, pos_ - begin));
    t.text = std::move(text);
    t.span = Span{src_.position_at(begin), src_.position_at(pos_)};
    tokens_.push_back(std::move(t));
  }

  void lex_token() {
    const std::size_t begin = pos_;
    const char c = peek();
    if (is_ident_start(c)) {
      while (is_ident_char(peek())) ++pos_;
      std::string word = to_upper(text_.substr(begin, pos_ - begin));
      if (peek() == '#' && (word == "T" || word == "TIME")) {
        lex_time(begin);
        return;
      }
      const TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
      push(kind, begin, std::move(word));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number(begin);
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(begin, c);
      return;
    }
    static constexpr std::array kMulti = {":=", "=>", "<>", "<=", ">=", "**", ".."};
    for (std::string_view op : kMulti) {
      if (text_.substr(pos_, 2) == op) {
        pos_ += 2;
        push(op == ".." ? TokenKind::Punctuation : TokenKind::Operator, begin, std::string(op));
        return;
      }
    }
    static constexpr std::string_view kOps = "=<>+-*/&";
    static constexpr std::string_view kPunct = "()[],;:.#";
    if (kOps.find(c) != std::string_view::npos) {
      ++pos_;
      push(TokenKind::Operator, begin, std::string(1, c));
      return;
    }
    if (kPunct.find(c) != std::string_view::npos) {
      ++pos_;
      push(TokenKind::Punctuation, begin, std::string(1, c));
      return;
    }
    // consume one whole code point so spans stay on character boundaries
    ++pos_;
    while (pos_ < text_.size() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) ++pos_;
    error(begin, pos_, "unexpected character '" + std::string(text_.substr(begin, pos_ - begin)) + "'");
  }

  void lex_time(std::size_t begin) {
    ++pos_;  // '#'
    const std::size_t body_begin = pos_;
    while (is_ident_char(peek()) || peek() == '.' || peek() == '-') {
      if (peek() == '.' && !std::isdigit(static_cast<unsigned char>(peek(1)))) break;
      ++pos_;
    }
    std::int64_t ms = 0;
    const auto body = text_.substr(body_begin, pos_ - body_begin);
    if (!parse_duration_ms(body, ms)) {
      error(begin, pos_, "malformed time literal '" + std::string(text_.substr(begin, pos_ - begin)) + "'");
      return;
    }
    push(TokenKind::TimeLiteral, begin, std::string(body));
    tokens_.back().int_value = ms;
  }

  void lex_number(std::size_t begin) {
    auto take_digits = [&](int base) {
      const std::size_t start = pos_;
      while (digit_value(peek()) < base || (peek() == '_' && pos_ > start)) ++pos_;
      return text_.substr(start, pos_ - start);
    };
    auto digits = take_digits(10);
    // based literal: 16#FF, 8#17, 2#1010
    if (peek() == '#') {
      int base = 0;
      std::from_chars(digits.data(), digits.data() + digits.size(), base);
      if (base != 2 && base != 8 && base != 16) {
        ++pos_;
        take_digits(16);
        error(begin, pos_, "unsupported integer base " + std::string(digits));
        return;
      }
      ++pos_;
      const auto body = take_digits(base);
      std::int64_t value = 0;
      if (!accumulate(body, base, value)) {
        error(begin, pos_, "malformed integer literal '" + std::string(text_.substr(begin, pos_ - begin)) + "'");
        return;
      }
      push(TokenKind::IntegerLiteral, begin, std::string(text_.substr(begin, pos_ - begin)));
      tokens_.back().int_value = value;
      return;
    }
    bool is_real = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_real = true;
      ++pos_;
      take_digits(10);
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      is_real = true;
      pos_ += 2;
      take_digits(10);
    }
    if (is_ident_start(peek())) {
      while (is_ident_char(peek())) ++pos_;
      error(begin, pos_, "malformed numeric literal '" + std::string(text_.substr(begin, pos_ - begin)) + "'");
      return;
    }
    std::string clean;
    for (char ch : text_.substr(begin, pos_ - begin)) {
      if (ch != '_') clean.push_back(ch);
    }
    if (is_real) {
      double value = std::strtod(clean.c_str(), nullptr);
      if (!std::isfinite(value)) {
        error(begin, pos_, "real literal out of range");
        return;
      }
      push(TokenKind::RealLiteral, begin, clean);
      tokens_.back().real_value = value;
      return;
    }
    std::int64_t value = 0;
    if (!accumulate(clean, 10, value)) {
      error(begin, pos_, "integer literal out of range");
      return;
    }
    push(TokenKind::IntegerLiteral, begin, clean);
    tokens_.back().int_value = value;
  }

  static bool accumulate(std::string_view digits, int base, std::int64_t& out) {
    std::uint64_t value = 0;
    bool any = false;
    for (char ch : digits) {
      if (ch == '_') continue;
      const int d = digit_value(ch);
      if (d >= base) return false;
      if (value > (std::numeric_limits<std::uint64_t>::max() - d) / base) return false;
      value = value * base + d;
      any = true;
    }
    // based literals may use the full 64-bit pattern; decimal ones must fit int64
    if (base == 10 && value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      return false;
    out = static_cast<std::int64_t>(value);
    return any;
  }

  void lex_string(std::size_t begin, char quote) {
    ++pos_;
    while (pos_ < text_.size() && peek() != quote && peek() != '\n') {
      if (peek() == '$' && pos_ + 1 < text_.size()) ++pos_;
      ++pos_;
    }
    if (peek() != quote) {
      error(begin, pos_, "unterminated string literal");
      return;
    }
    ++pos_;
    std::string decoded;
    if (!decode_st_string(text_.substr(begin + 1, pos_ - begin - 2), decoded)) {
      error(begin, pos_, "invalid escape sequence in string literal");
      return;
    }
    push(TokenKind::StringLiteral, begin, std::move(decoded));
  }

  const SourceUnit& src_;
  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
  std::vector<Diagnostic> errors_;
};

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::IntegerLiteral: return "integer-literal";
    case TokenKind::RealLiteral: return "real-literal";
    case TokenKind::TimeLiteral: return "time-literal";
    case TokenKind::StringLiteral: return "string-literal";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::EndOfInput: return "end-of-input";
  }
  return "?";
}

bool is_keyword(std::string_view upper) {
  return std::binary_search(kKeywords.begin(), kKeywords.end(), upper,
                            [](std::string_view a, std::string_view b) { return a < b; });
}

std::vector<Token> tokenize(const SourceUnit& src) { return Lexer(src).run(); }

bool parse_duration_ms(std::string_view body, std::int64_t& ms) {
  std::string s;
  for (char c : body) {
    if (c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s.empty() || s[0] == '-') return false;
  double total = 0.0;
  std::size_t i = 0;
  int last_rank = 100;
  while (i < s.size()) {
    const std::size_t num_begin = i;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
    if (i == num_begin) return false;
    const std::string num = s.substr(num_begin, i - num_begin);
    if (std::count(num.begin(), num.end(), '.') > 1 || num.back() == '.') return false;
    double factor = 0.0;
    int rank = 0;
    if (s.compare(i, 2, "ms") == 0) {
      factor = 1.0, rank = 0, i += 2;
    } else if (s.compare(i, 1, "d") == 0) {
      factor = 86400000.0, rank = 4, i += 1;
    } else if (s.compare(i, 1, "h") == 0) {
      factor = 3600000.0, rank = 3, i += 1;
    } else if (s.compare(i, 1, "m") == 0) {
      factor = 60000.0, rank = 2, i += 1;
    } else if (s.compare(i, 1, "s") == 0) {
      factor = 1000.0, rank = 1, i += 1;
    } else {
      return false;
    }
    // units must appear largest first, each at most once
    if (rank >= last_rank) return false;
    last_rank = rank;
    total += std::strtod(num.c_str(), nullptr) * factor;
  }
  if (total > 9.2e18) return false;
  ms = static_cast<std::int64_t>(std::llround(total));
  return true;
}

bool decode_st_string(std::string_view body, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '$') {
      out.push_back(body[i]);
      continue;
    }
    if (++i >= body.size()) return false;
    switch (std::toupper(static_cast<unsigned char>(body[i]))) {
      case '$': out.push_back('$'); break;
      case '\'': out.push_back('\''); break;
      case '"': out.push_back('"'); break;
      case 'L':
      case 'N': out.push_back('\n'); break;
      case 'R': out.push_back('\r'); break;
      case 'T': out.push_back('\t'); break;
      case 'P': out.push_back('\f'); break;
      default: {
        if (i + 1 >= body.size()) return false;
        const int hi = digit_value(body[i]);
        const int lo = digit_value(body[i + 1]);
        if (hi > 15 || lo > 15) return false;
        out.push_back(static_cast<char>(hi * 16 + lo));
        ++i;
      }
    }
  }
  return true;
}

}  // namespace sttest
