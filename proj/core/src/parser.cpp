#include "sttest/parser.hpp"

#include <initializer_list>
#include <map>

#include "sttest/diagnostic.hpp"

namespace sttest {

ExprPtr make_expr(ExprKind kind, Span span) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->span = span;
  return e;
}

StmtPtr make_stmt(StmtKind kind, Span span) {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->span = span;
  s->site = span;
  return s;
}

std::string_view section_keyword(Section s) {
  switch (s) {
    case Section::Input: return "VAR_INPUT";
    case Section::Output: return "VAR_OUTPUT";
    case Section::InOut: return "VAR_IN_OUT";
    case Section::Local: return "VAR";
    case Section::Temp: return "VAR_TEMP";
  }
  return "VAR";
}

std::string_view pou_keyword(PouKind k) {
  switch (k) {
    case PouKind::Program: return "PROGRAM";
    case PouKind::FunctionBlock: return "FUNCTION_BLOCK";
    case PouKind::Function: return "FUNCTION";
  }
  return "PROGRAM";
}

namespace {

struct SyntaxError {};

Span join(const Span& a, const Span& b) { return Span{a.begin, b.end}; }

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::string origin)
      : tokens_(tokens), origin_(std::move(origin)) {}

  Ast run() {
    Ast ast;
    ast.origin = origin_;
    while (!at_end()) {
      const std::size_t start = pos_;
      try {
        if (cur().is_keyword("FUNCTION_BLOCK") || cur().is_keyword("FUNCTION") ||
            cur().is_keyword("PROGRAM")) {
          ast.pous.push_back(parse_pou());
        } else if (cur().is_keyword("CONFIGURATION")) {
          ast.configurations.push_back(parse_configuration());
        } else {
          fail("expected FUNCTION_BLOCK, FUNCTION, PROGRAM or CONFIGURATION");
        }
      } catch (const SyntaxError&) {
        if (pos_ == start) advance();
        while (!at_end() && !is_top_level_start()) advance();
      }
    }
    if (!errors_.empty()) throw CompileError(Phase::Parse, std::move(errors_), origin_);
    ast.statement_count = next_id_;
    return ast;
  }

 private:
  // -- token helpers --------------------------------------------------------

  const Token& cur() const { return tokens_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return tokens_[std::min(pos_ + n, tokens_.size() - 1)];
  }
  bool at_end() const { return cur().kind == TokenKind::EndOfInput; }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (!at_end()) ++pos_;
    return t;
  }
  const Token& previous() const { return tokens_[pos_ == 0 ? 0 : pos_ - 1]; }

  bool accept_keyword(std::string_view kw) {
    if (!cur().is_keyword(kw)) return false;
    advance();
    return true;
  }
  bool accept_op(std::string_view op) {
    if (!cur().is_op(op)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail(std::string message, std::string hint = {}) { fail_at(cur().span, std::move(message), std::move(hint)); }
  [[noreturn]] void fail_at(const Span& at, std::string message, std::string hint = {}) {
    errors_.push_back(Diagnostic{Phase::Parse, std::move(message), at, std::move(hint)});
    throw SyntaxError{};
  }

  std::string describe(const Token& t) const {
    if (t.kind == TokenKind::EndOfInput) return "end of input";
    return "'" + t.lexeme + "'";
  }

  const Token& expect_keyword(std::string_view kw) {
    if (!cur().is_keyword(kw))
      fail("unexpected " + describe(cur()), "expected '" + std::string(kw) + "'");
    return advance();
  }
  const Token& expect_op(std::string_view op) {
    if (!cur().is_op(op)) fail("unexpected " + describe(cur()), "expected '" + std::string(op) + "'");
    return advance();
  }
  std::string expect_identifier(std::string_view what) {
    if (cur().kind != TokenKind::Identifier)
      fail("unexpected " + describe(cur()), "expected " + std::string(what));
    return advance().text;
  }

  bool is_top_level_start() const {
    return cur().is_keyword("FUNCTION_BLOCK") || cur().is_keyword("FUNCTION") ||
           cur().is_keyword("PROGRAM") || cur().is_keyword("CONFIGURATION");
  }
  bool is_pou_end() const {
    return cur().is_keyword("END_FUNCTION_BLOCK") || cur().is_keyword("END_FUNCTION") ||
           cur().is_keyword("END_PROGRAM");
  }
  bool is_section_start() const {
    return cur().is_keyword("VAR") || cur().is_keyword("VAR_INPUT") ||
           cur().is_keyword("VAR_OUTPUT") || cur().is_keyword("VAR_IN_OUT") ||
           cur().is_keyword("VAR_TEMP");
  }
  bool is_block_boundary() const {
    static constexpr std::string_view kBoundary[] = {
        "END_IF", "ELSIF", "ELSE", "END_CASE", "END_FOR", "END_WHILE", "END_REPEAT", "UNTIL",
        "IF", "CASE", "FOR", "WHILE", "REPEAT", "EXIT", "RETURN", "END_VAR"};
    if (cur().kind == TokenKind::Keyword) {
      for (auto kw : kBoundary) {
        if (cur().text == kw) return true;
      }
    }
    return is_pou_end() || is_section_start() || is_top_level_start() || at_end();
  }

  /// Statement-level recovery: skip to the next `;` (consumed) or boundary keyword.
  void synchronize(std::size_t start) {
    static const std::map<std::string_view, std::string_view> kClose = {
        {"IF", "END_IF"}, {"CASE", "END_CASE"}, {"FOR", "END_FOR"},
        {"WHILE", "END_WHILE"}, {"REPEAT", "END_REPEAT"}};
    const Token& first = tokens_[start];
    if (first.kind == TokenKind::Keyword && kClose.count(first.text)) {
      // broken structured statement: skip to its matching end keyword
      int depth = 0;
      while (!at_end() && !is_pou_end() && !is_top_level_start()) {
        const Token& t = advance();
        if (t.kind != TokenKind::Keyword) continue;
        if (kClose.count(t.text) && &t != &first) ++depth;
        for (const auto& [open, close] : kClose) {
          if (t.text != close) continue;
          if (depth == 0) {
            accept_op(";");
            return;
          }
          --depth;
        }
      }
      return;
    }
    if (pos_ == start) advance();
    while (!at_end()) {
      if (accept_op(";")) return;
      if (is_block_boundary()) return;
      advance();
    }
  }

  // -- declarations ---------------------------------------------------------

  PouDecl parse_pou() {
    PouDecl pou;
    const Token& head = advance();
    const Span head_span = head.span;
    std::string_view end_kw;
    if (head.text == "FUNCTION_BLOCK") {
      pou.kind = PouKind::FunctionBlock;
      end_kw = "END_FUNCTION_BLOCK";
    } else if (head.text == "FUNCTION") {
      pou.kind = PouKind::Function;
      end_kw = "END_FUNCTION";
    } else {
      pou.kind = PouKind::Program;
      end_kw = "END_PROGRAM";
    }
    pou.name = expect_identifier("a POU name");
    if (pou.kind == PouKind::Function) {
      expect_op(":");
      pou.return_type = parse_type_spec();
    }
    while (is_section_start()) pou.sections.push_back(parse_var_section());
    pou.body = parse_statements({end_kw});
    if (!cur().is_keyword(end_kw)) {
      fail("unexpected " + describe(cur()), "expected '" + std::string(end_kw) + "'");
    }
    pou.span = join(head_span, advance().span);
    return pou;
  }

  VarSection parse_var_section() {
    VarSection section;
    const Token& head = advance();
    section.span = head.span;
    if (head.text == "VAR_INPUT") section.kind = Section::Input;
    else if (head.text == "VAR_OUTPUT") section.kind = Section::Output;
    else if (head.text == "VAR_IN_OUT") section.kind = Section::InOut;
    else if (head.text == "VAR_TEMP") section.kind = Section::Temp;
    else section.kind = Section::Local;
    while (true) {
      if (accept_keyword("CONSTANT")) section.constant = true;
      else if (accept_keyword("RETAIN")) section.retain = true;
      else break;
    }
    while (!cur().is_keyword("END_VAR") && !at_end() && !is_pou_end() && !is_top_level_start() &&
           !is_section_start()) {
      const std::size_t start = pos_;
      try {
        parse_var_decls(section.vars);
      } catch (const SyntaxError&) {
        if (pos_ == start) advance();
        while (!at_end() && !cur().is_op(";") && !cur().is_keyword("END_VAR") && !is_pou_end() &&
               !is_top_level_start() && !is_section_start())
          advance();
        accept_op(";");
      }
    }
    section.span = join(section.span, expect_keyword("END_VAR").span);
    return section;
  }

  void parse_var_decls(std::vector<VarDecl>& out) {
    std::vector<std::pair<std::string, Span>> names;
    do {
      const Span span = cur().span;
      names.emplace_back(expect_identifier("a variable name"), span);
    } while (accept_op(","));
    expect_op(":");
    TypeSpec type = parse_type_spec();
    ExprPtr init;
    std::vector<ExprPtr> init_list;
    if (accept_op(":=")) {
      if (accept_op("[")) {
        if (!cur().is_op("]")) {
          do {
            init_list.push_back(parse_expression());
          } while (accept_op(","));
        }
        expect_op("]");
        if (init_list.empty()) fail("empty array initializer");
      } else {
        init = parse_expression();
      }
    }
    const Span end = expect_op(";").span;
    for (std::size_t i = 0; i < names.size(); ++i) {
      VarDecl decl;
      decl.name = names[i].first;
      decl.type = type;
      decl.span = join(names[i].second, end);
      if (init) decl.init = clone(*init);
      for (const auto& e : init_list) decl.init_list.push_back(clone(*e));
      out.push_back(std::move(decl));
    }
  }

  std::int64_t parse_signed_integer() {
    bool negative = false;
    if (accept_op("-")) negative = true;
    else accept_op("+");
    if (cur().kind != TokenKind::IntegerLiteral)
      fail("unexpected " + describe(cur()), "expected an integer literal");
    const std::int64_t v = advance().int_value;
    return negative ? -v : v;
  }

  TypeSpec parse_type_spec() {
    TypeSpec spec;
    spec.span = cur().span;
    if (accept_keyword("ARRAY")) {
      expect_op("[");
      const std::int64_t lo = parse_signed_integer();
      expect_op("..");
      const std::int64_t hi = parse_signed_integer();
      expect_op("]");
      expect_keyword("OF");
      TypeSpec elem = parse_type_spec();
      if (elem.array_bounds) fail("nested arrays are not supported");
      elem.array_bounds = std::make_pair(lo, hi);
      elem.span = join(spec.span, elem.span);
      return elem;
    }
    spec.name = expect_identifier("a type name");
    if (spec.name == "STRING" && (cur().is_op("(") || cur().is_op("["))) {
      const bool paren = cur().is_op("(");
      advance();
      if (cur().kind != TokenKind::IntegerLiteral)
        fail("unexpected " + describe(cur()), "expected a string length");
      spec.string_length = static_cast<std::uint32_t>(
          std::min<std::int64_t>(advance().int_value, 0xFFFFFFFF));
      expect_op(paren ? ")" : "]");
    }
    spec.span = join(spec.span, previous().span);
    return spec;
  }

  ConfigurationDecl parse_configuration() {
    ConfigurationDecl config;
    const Span head = advance().span;
    config.name = expect_identifier("a configuration name");
    while (!cur().is_keyword("END_CONFIGURATION") && !at_end()) {
      if (cur().is_keyword("RESOURCE")) {
        const Span rhead = advance().span;
        ResourceDecl res;
        res.name = expect_identifier("a resource name");
        if (cur().kind == TokenKind::Identifier && cur().text == "ON") {
          advance();
          res.target = expect_identifier("a resource type");
        }
        parse_resource_body(res, "END_RESOURCE");
        res.span = join(rhead, expect_keyword("END_RESOURCE").span);
        accept_op(";");
        config.resources.push_back(std::move(res));
      } else {
        if (config.resources.empty() || !config.resources.back().name.empty()) {
          config.resources.emplace_back();
          config.resources.back().span = cur().span;
        }
        parse_resource_body(config.resources.back(), "END_CONFIGURATION");
      }
    }
    config.span = join(head, expect_keyword("END_CONFIGURATION").span);
    return config;
  }

  void parse_resource_body(ResourceDecl& res, std::string_view end_kw) {
    while (!cur().is_keyword(end_kw) && !at_end() && !cur().is_keyword("RESOURCE")) {
      if (cur().kind == TokenKind::Identifier && cur().text == "TASK") {
        TaskDecl task;
        const Span head = advance().span;
        task.name = expect_identifier("a task name");
        expect_op("(");
        if (!cur().is_op(")")) {
          do {
            const std::string key = expect_identifier("a task property");
            expect_op(":=");
            if (key == "INTERVAL") {
              if (cur().kind != TokenKind::TimeLiteral)
                fail("unexpected " + describe(cur()), "expected a time literal");
              task.interval_ms = advance().int_value;
            } else if (key == "PRIORITY") {
              task.priority = parse_signed_integer();
            } else {
              fail("unknown task property '" + key + "'", "expected INTERVAL or PRIORITY");
            }
          } while (accept_op(","));
        }
        expect_op(")");
        task.span = join(head, expect_op(";").span);
        res.tasks.push_back(std::move(task));
      } else if (cur().is_keyword("PROGRAM")) {
        ProgramInstanceDecl prog;
        const Span head = advance().span;
        prog.instance = expect_identifier("a program instance name");
        if (cur().kind == TokenKind::Identifier && cur().text == "WITH") {
          advance();
          prog.task = expect_identifier("a task name");
        }
        expect_op(":");
        prog.type = expect_identifier("a program type name");
        prog.span = join(head, expect_op(";").span);
        res.programs.push_back(std::move(prog));
      } else {
        fail("unexpected " + describe(cur()), "expected TASK, PROGRAM or '" + std::string(end_kw) + "'");
      }
    }
  }

  // -- statements -----------------------------------------------------------

  StmtList parse_statements(std::initializer_list<std::string_view> terminators) {
    StmtList list;
    auto terminated = [&] {
      if (at_end() || is_pou_end() || is_top_level_start() || is_section_start()) return true;
      for (auto t : terminators) {
        if (cur().is_keyword(t)) return true;
      }
      return false;
    };
    while (!terminated()) {
      if (accept_op(";")) continue;  // empty statement
      const std::size_t start = pos_;
      try {
        list.push_back(parse_statement());
      } catch (const SyntaxError&) {
        synchronize(start);
      }
    }
    return list;
  }

  StatementId next_id() { return next_id_++; }

  void accept_trailing_semicolon(StmtPtr& s) {
    if (cur().is_op(";")) s->span = join(s->span, advance().span);
  }

  StmtPtr parse_statement() {
    const Token& t = cur();
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "IF") return parse_if();
      if (t.text == "CASE") return parse_case();
      if (t.text == "FOR") return parse_for();
      if (t.text == "WHILE") return parse_while();
      if (t.text == "REPEAT") return parse_repeat();
      if (t.text == "EXIT" || t.text == "RETURN") {
        auto s = make_stmt(t.text == "EXIT" ? StmtKind::Exit : StmtKind::Return, t.span);
        s->id = next_id();
        advance();
        s->span = join(s->span, expect_op(";").span);
        s->site = s->span;
        return s;
      }
      fail("unexpected " + describe(t), "expected a statement");
    }
    if (t.kind != TokenKind::Identifier) fail("unexpected " + describe(t), "expected a statement");

    const StatementId id = next_id();
    const Span begin = t.span;
    ExprPtr lhs = parse_designator();
    if (accept_op(":=")) {
      auto s = make_stmt(StmtKind::Assign, begin);
      s->id = id;
      s->target = std::move(lhs);
      s->value = parse_expression();
      s->span = join(begin, expect_op(";").span);
      s->site = s->span;
      return s;
    }
    if (cur().is_op("(") && lhs->kind == ExprKind::Name) {
      auto call = make_expr(ExprKind::Call, lhs->span);
      call->name = lhs->name;
      parse_arguments(*call);
      auto s = make_stmt(StmtKind::Call, begin);
      s->id = id;
      s->value = std::move(call);
      s->span = join(begin, expect_op(";").span);
      s->site = s->span;
      return s;
    }
    --next_id_;
    fail_at(begin, "expression statement not allowed", "expected ':=' or a call");
  }

  StmtPtr parse_if() {
    auto s = make_stmt(StmtKind::If, cur().span);
    do {
      IfBranch branch;
      const Span head = advance().span;  // IF / ELSIF
      branch.guard_id = next_id();
      branch.condition = parse_expression();
      branch.guard_span = join(head, expect_keyword("THEN").span);
      branch.body = parse_statements({"ELSIF", "ELSE", "END_IF"});
      s->branches.push_back(std::move(branch));
    } while (cur().is_keyword("ELSIF"));
    if (accept_keyword("ELSE")) {
      s->has_else = true;
      s->else_body = parse_statements({"END_IF"});
    }
    s->span = join(s->span, expect_keyword("END_IF").span);
    accept_trailing_semicolon(s);
    s->id = s->branches.front().guard_id;
    s->site = s->branches.front().guard_span;
    return s;
  }

  bool at_case_label() const {
    if (cur().kind == TokenKind::IntegerLiteral) return true;
    return (cur().is_op("-") || cur().is_op("+")) && peek().kind == TokenKind::IntegerLiteral;
  }

  StmtPtr parse_case() {
    auto s = make_stmt(StmtKind::Case, advance().span);
    s->id = next_id();
    s->value = parse_expression();
    s->site = join(s->span, expect_keyword("OF").span);
    while (at_case_label()) {
      CaseBranch branch;
      do {
        CaseLabel label;
        label.span = cur().span;
        label.lower = parse_signed_integer();
        label.upper = label.lower;
        if (accept_op("..")) label.upper = parse_signed_integer();
        label.span = join(label.span, previous().span);
        if (label.upper < label.lower) {
          errors_.push_back(Diagnostic{Phase::Parse, "empty CASE range", label.span, {}});
        }
        branch.labels.push_back(label);
      } while (accept_op(","));
      expect_op(":");
      branch.body = parse_case_body();
      s->cases.push_back(std::move(branch));
    }
    if (accept_keyword("ELSE")) {
      s->has_else = true;
      s->else_body = parse_statements({"END_CASE"});
    }
    if (!cur().is_keyword("END_CASE")) {
      fail("unexpected " + describe(cur()), "expected a CASE label, ELSE or END_CASE");
    }
    s->span = join(s->span, advance().span);
    accept_trailing_semicolon(s);
    return s;
  }

  StmtList parse_case_body() {
    StmtList list;
    while (!at_case_label() && !cur().is_keyword("ELSE") && !cur().is_keyword("END_CASE") &&
           !at_end() && !is_pou_end() && !is_top_level_start()) {
      if (accept_op(";")) continue;
      const std::size_t start = pos_;
      try {
        list.push_back(parse_statement());
      } catch (const SyntaxError&) {
        synchronize(start);
        if (cur().is_keyword("END_IF") || cur().is_keyword("END_FOR") ||
            cur().is_keyword("END_WHILE") || cur().is_keyword("END_REPEAT") ||
            cur().is_keyword("UNTIL") || cur().is_keyword("ELSIF") || cur().is_keyword("END_VAR"))
          break;
      }
    }
    return list;
  }

  StmtPtr parse_for() {
    auto s = make_stmt(StmtKind::For, advance().span);
    s->id = next_id();
    auto var = make_expr(ExprKind::Name, cur().span);
    var->name = expect_identifier("a loop variable");
    s->target = std::move(var);
    expect_op(":=");
    s->from = parse_expression();
    expect_keyword("TO");
    s->to = parse_expression();
    if (accept_keyword("BY")) s->by = parse_expression();
    s->site = join(s->span, expect_keyword("DO").span);
    s->body = parse_statements({"END_FOR"});
    s->span = join(s->span, expect_keyword("END_FOR").span);
    accept_trailing_semicolon(s);
    return s;
  }

  StmtPtr parse_while() {
    auto s = make_stmt(StmtKind::While, advance().span);
    s->id = next_id();
    s->value = parse_expression();
    s->site = join(s->span, expect_keyword("DO").span);
    s->body = parse_statements({"END_WHILE"});
    s->span = join(s->span, expect_keyword("END_WHILE").span);
    accept_trailing_semicolon(s);
    return s;
  }

  StmtPtr parse_repeat() {
    auto s = make_stmt(StmtKind::Repeat, advance().span);
    s->id = next_id();
    s->body = parse_statements({"UNTIL", "END_REPEAT"});
    const Span until = expect_keyword("UNTIL").span;
    s->value = parse_expression();
    s->site = join(until, s->value->span);
    s->span = join(s->span, expect_keyword("END_REPEAT").span);
    accept_trailing_semicolon(s);
    return s;
  }

  // -- expressions ----------------------------------------------------------

  ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = make_expr(ExprKind::Binary, join(lhs->span, rhs->span));
    e->binary_op = op;
    e->operands.push_back(std::move(lhs));
    e->operands.push_back(std::move(rhs));
    return e;
  }

  ExprPtr parse_expression() { return parse_or(); }

  ExprPtr parse_or() {
    auto lhs = parse_xor();
    while (accept_keyword("OR")) lhs = binary(BinaryOp::Or, std::move(lhs), parse_xor());
    return lhs;
  }
  ExprPtr parse_xor() {
    auto lhs = parse_and();
    while (accept_keyword("XOR")) lhs = binary(BinaryOp::Xor, std::move(lhs), parse_and());
    return lhs;
  }
  ExprPtr parse_and() {
    auto lhs = parse_equality();
    while (accept_keyword("AND") || accept_op("&"))
      lhs = binary(BinaryOp::And, std::move(lhs), parse_equality());
    return lhs;
  }
  ExprPtr parse_equality() {
    auto lhs = parse_relational();
    while (true) {
      if (accept_op("=")) lhs = binary(BinaryOp::Eq, std::move(lhs), parse_relational());
      else if (accept_op("<>")) lhs = binary(BinaryOp::Ne, std::move(lhs), parse_relational());
      else return lhs;
    }
  }
  ExprPtr parse_relational() {
    auto lhs = parse_additive();
    while (true) {
      if (accept_op("<")) lhs = binary(BinaryOp::Lt, std::move(lhs), parse_additive());
      else if (accept_op("<=")) lhs = binary(BinaryOp::Le, std::move(lhs), parse_additive());
      else if (accept_op(">")) lhs = binary(BinaryOp::Gt, std::move(lhs), parse_additive());
      else if (accept_op(">=")) lhs = binary(BinaryOp::Ge, std::move(lhs), parse_additive());
      else return lhs;
    }
  }
  ExprPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (true) {
      if (accept_op("+")) lhs = binary(BinaryOp::Add, std::move(lhs), parse_multiplicative());
      else if (accept_op("-")) lhs = binary(BinaryOp::Sub, std::move(lhs), parse_multiplicative());
      else return lhs;
    }
  }
  ExprPtr parse_multiplicative() {
    auto lhs = parse_unary();
    while (true) {
      if (accept_op("*")) lhs = binary(BinaryOp::Mul, std::move(lhs), parse_unary());
      else if (accept_op("/")) lhs = binary(BinaryOp::Div, std::move(lhs), parse_unary());
      else if (accept_keyword("MOD")) lhs = binary(BinaryOp::Mod, std::move(lhs), parse_unary());
      else return lhs;
    }
  }
  ExprPtr parse_unary() {
    const Span start = cur().span;
    UnaryOp op;
    if (accept_op("-")) op = UnaryOp::Neg;
    else if (accept_op("+")) op = UnaryOp::Plus;
    else if (accept_keyword("NOT")) op = UnaryOp::Not;
    else return parse_power();
    auto operand = parse_unary();
    auto e = make_expr(ExprKind::Unary, join(start, operand->span));
    e->unary_op = op;
    e->operands.push_back(std::move(operand));
    return e;
  }
  ExprPtr parse_power() {
    auto lhs = parse_primary();
    while (accept_op("**")) lhs = binary(BinaryOp::Pow, std::move(lhs), parse_primary());
    return lhs;
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::IntegerLiteral: {
        auto e = make_expr(ExprKind::Literal, t.span);
        e->literal_kind = LiteralKind::Int;
        e->int_value = t.int_value;
        advance();
        return e;
      }
      case TokenKind::RealLiteral: {
        auto e = make_expr(ExprKind::Literal, t.span);
        e->literal_kind = LiteralKind::Real;
        e->real_value = t.real_value;
        advance();
        return e;
      }
      case TokenKind::TimeLiteral: {
        auto e = make_expr(ExprKind::Literal, t.span);
        e->literal_kind = LiteralKind::Time;
        e->int_value = t.int_value;
        advance();
        return e;
      }
      case TokenKind::StringLiteral: {
        auto e = make_expr(ExprKind::Literal, t.span);
        e->literal_kind = LiteralKind::String;
        e->string_value = t.text;
        advance();
        return e;
      }
      case TokenKind::Keyword:
        if (t.text == "TRUE" || t.text == "FALSE") {
          auto e = make_expr(ExprKind::Literal, t.span);
          e->literal_kind = LiteralKind::Bool;
          e->bool_value = t.text == "TRUE";
          advance();
          return e;
        }
        break;
      case TokenKind::Identifier: {
        if (peek().is_op("(")) {
          auto e = make_expr(ExprKind::Call, t.span);
          e->name = advance().text;
          parse_arguments(*e);
          return e;
        }
        return parse_designator();
      }
      default:
        if (t.is_op("(")) {
          advance();
          auto inner = parse_expression();
          expect_op(")");
          return inner;
        }
        break;
    }
    fail("unexpected " + describe(t), "expected an expression");
  }

  ExprPtr parse_designator() {
    auto e = make_expr(ExprKind::Name, cur().span);
    e->name = expect_identifier("a variable name");
    while (true) {
      if (cur().is_op(".")) {
        advance();
        auto member = make_expr(ExprKind::Member, e->span);
        member->name = expect_identifier("a member name");
        member->span = join(e->span, previous().span);
        member->operands.push_back(std::move(e));
        e = std::move(member);
      } else if (cur().is_op("[")) {
        advance();
        auto index = make_expr(ExprKind::Index, e->span);
        index->operands.push_back(std::move(e));
        index->operands.push_back(parse_expression());
        index->span = join(index->span, expect_op("]").span);
        e = std::move(index);
      } else {
        return e;
      }
    }
  }

  void parse_arguments(Expr& call) {
    expect_op("(");
    if (!cur().is_op(")")) {
      do {
        Argument arg;
        arg.span = cur().span;
        if (cur().kind == TokenKind::Identifier && (peek().is_op(":=") || peek().is_op("=>"))) {
          arg.name = advance().text;
          arg.output = advance().text == "=>";
        }
        arg.value = parse_expression();
        arg.span = join(arg.span, arg.value->span);
        call.args.push_back(std::move(arg));
      } while (accept_op(","));
    }
    call.span = join(call.span, expect_op(")").span);
  }

  static ExprPtr clone(const Expr& e) {
    auto c = make_expr(e.kind, e.span);
    c->literal_kind = e.literal_kind;
    c->bool_value = e.bool_value;
    c->int_value = e.int_value;
    c->real_value = e.real_value;
    c->string_value = e.string_value;
    c->name = e.name;
    c->unary_op = e.unary_op;
    c->binary_op = e.binary_op;
    for (const auto& op : e.operands) c->operands.push_back(clone(*op));
    for (const auto& a : e.args) {
      Argument arg;
      arg.name = a.name;
      arg.output = a.output;
      arg.span = a.span;
      arg.value = clone(*a.value);
      c->args.push_back(std::move(arg));
    }
    return c;
  }

  const std::vector<Token>& tokens_;
  std::string origin_;
  std::size_t pos_ = 0;
  StatementId next_id_ = 0;
  std::vector<Diagnostic> errors_;
};

}  // namespace

Ast parse(const std::vector<Token>& tokens, std::string origin) {
  if (tokens.empty() || tokens.back().kind != TokenKind::EndOfInput)
    throw std::invalid_argument("token list must end with an end-of-input token");
  return Parser(tokens, std::move(origin)).run();
}

Ast parse_source(const SourceUnit& src) { return parse(tokenize(src), src.origin()); }

}  // namespace sttest
