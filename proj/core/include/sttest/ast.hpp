#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sttest/source.hpp"
#include "sttest/types.hpp"
#include "sttest/value.hpp"

namespace sttest {

using StatementId = std::uint32_t;
inline constexpr StatementId kNoStatement = 0xFFFFFFFFu;

struct PouInfo;
struct BuiltinFunction;

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind { Literal, Name, Member, Index, Unary, Binary, Call, Convert };
enum class UnaryOp { Neg, Plus, Not };
enum class BinaryOp { Or, Xor, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod, Pow };
enum class LiteralKind { Bool, Int, Real, Time, String };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Argument {
  std::string name;     // empty for positional arguments
  bool output = false;  // `name => target`
  ExprPtr value;
  Span span;
  std::uint32_t slot = 0;  // resolved parameter slot in the callee
};

/// Where a resolved Name lives at run time.
struct Binding {
  enum class Scope { None, Local, Pou } scope = Scope::None;
  std::uint32_t slot = 0;         // variable index within the enclosing POU
  const PouInfo* pou = nullptr;   // Pou scope: callee; Member: owning FB
};

struct Expr {
  ExprKind kind = ExprKind::Literal;
  Span span;

  // Literal
  LiteralKind literal_kind = LiteralKind::Int;
  bool bool_value = false;
  std::int64_t int_value = 0;  // Int, or milliseconds for Time
  double real_value = 0.0;
  std::string string_value;

  std::string name;  // Name, Member (member name), Call (callee)
  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  std::vector<ExprPtr> operands;  // Unary: 1, Binary: 2, Member: base, Index: base+index, Convert: 1
  std::vector<Argument> args;     // Call

  // filled in by resolve()
  Type type;
  Binding binding;
  const BuiltinFunction* builtin = nullptr;  // Call to a standard function
  Type operand_type;                         // Binary comparisons: the unified operand type
  Value constant;                            // Literal: the settled value
};

ExprPtr make_expr(ExprKind kind, Span span);

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

enum class StmtKind { Assign, If, Case, For, While, Repeat, Exit, Return, Call };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using StmtList = std::vector<StmtPtr>;

struct IfBranch {
  ExprPtr condition;
  StmtList body;
  StatementId guard_id = kNoStatement;
  Span guard_span;  // `IF cond THEN` / `ELSIF cond THEN`
};

struct CaseLabel {
  std::int64_t lower = 0;
  std::int64_t upper = 0;
  Span span;
};

struct CaseBranch {
  std::vector<CaseLabel> labels;
  StmtList body;
};

struct Stmt {
  StmtKind kind = StmtKind::Assign;
  Span span;
  StatementId id = kNoStatement;
  /// Coverage site; the statement span for simple statements, the guard
  /// header for IF/CASE/FOR/WHILE and the UNTIL clause for REPEAT.
  Span site;

  ExprPtr target;  // Assign target, FOR control variable
  ExprPtr value;   // Assign value, WHILE/REPEAT condition, CASE selector, Call expression

  std::vector<IfBranch> branches;  // If (branches[0].guard_id == id)
  std::vector<CaseBranch> cases;
  StmtList else_body;              // If, Case
  bool has_else = false;

  ExprPtr from, to, by;  // For; `by` may be null
  StmtList body;         // For, While, Repeat
};

StmtPtr make_stmt(StmtKind kind, Span span);

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

enum class Section { Input, Output, InOut, Local, Temp };
enum class PouKind { Program, FunctionBlock, Function };

std::string_view section_keyword(Section s);
std::string_view pou_keyword(PouKind k);

struct TypeSpec {
  std::string name;  // upper-cased; the element type for arrays
  std::optional<std::uint32_t> string_length;
  std::optional<std::pair<std::int64_t, std::int64_t>> array_bounds;
  Span span;
};

struct VarDecl {
  std::string name;
  TypeSpec type;
  ExprPtr init;                   // scalar initializer
  std::vector<ExprPtr> init_list; // `[a, b, c]` array initializer
  Span span;
};

struct VarSection {
  Section kind = Section::Local;
  bool constant = false;
  bool retain = false;
  std::vector<VarDecl> vars;
  Span span;
};

struct PouDecl {
  PouKind kind = PouKind::FunctionBlock;
  std::string name;
  std::optional<TypeSpec> return_type;  // functions
  std::vector<VarSection> sections;
  StmtList body;
  Span span;
};

struct TaskDecl {
  std::string name;
  std::int64_t interval_ms = 0;
  std::int64_t priority = 0;
  Span span;
};

struct ProgramInstanceDecl {
  std::string instance;
  std::string task;  // may be empty
  std::string type;
  Span span;
};

struct ResourceDecl {
  std::string name;
  std::string target;
  std::vector<TaskDecl> tasks;
  std::vector<ProgramInstanceDecl> programs;
  Span span;
};

struct ConfigurationDecl {
  std::string name;
  std::vector<ResourceDecl> resources;
  Span span;
};

struct Ast {
  std::string origin;
  std::vector<PouDecl> pous;
  std::vector<ConfigurationDecl> configurations;
  std::uint32_t statement_count = 0;
};

}  // namespace sttest
