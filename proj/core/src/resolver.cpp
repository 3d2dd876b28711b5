#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "sttest/builtins.hpp"
#include "sttest/diagnostic.hpp"
#include "sttest/parser.hpp"
#include "sttest/program.hpp"

namespace sttest {

std::optional<std::uint32_t> PouInfo::find(std::string_view n) const {
  for (std::uint32_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == n) return i;
  }
  return std::nullopt;
}

std::vector<std::uint32_t> PouInfo::slots_in(Section section) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < vars.size(); ++i) {
    if (vars[i].section == section) out.push_back(i);
  }
  return out;
}

const PouInfo* TypedProgram::find_local_pou(std::string_view name) const {
  auto it = pou_index_.find(std::string(name));
  return it == pou_index_.end() ? nullptr : it->second;
}

const PouInfo* TypedProgram::find_pou(std::string_view name) const {
  if (const auto* p = find_local_pou(name)) return p;
  for (const auto& lib : libraries_) {
    if (const auto* p = lib->find_pou(name)) return p;
  }
  return find_builtin_fb(name);
}

const PouInfo* TypedProgram::pou_of(StatementId id) const {
  return id < id_owner_.size() ? id_owner_[id] : nullptr;
}

Span TypedProgram::site_of(StatementId id) const {
  return id < id_site_.size() ? id_site_[id] : Span{};
}

std::vector<InterfaceVar> interface_of(const PouInfo& pou) {
  std::vector<InterfaceVar> out;
  for (const auto& v : pou.vars) {
    if (v.section == Section::Input || v.section == Section::Output || v.section == Section::InOut)
      out.push_back(InterfaceVar{v.name, v.type, v.section});
  }
  return out;
}

class Resolver {
 public:
  Resolver(Ast ast, std::span<const std::shared_ptr<const TypedProgram>> libraries) {
    prog_ = std::make_shared<TypedProgram>();
    prog_->ast_ = std::move(ast);
    prog_->libraries_.assign(libraries.begin(), libraries.end());
  }

  std::shared_ptr<const TypedProgram> run() {
    declare_pous();
    for (auto& pou : prog_->pous_) build_vars(*pou);
    check_instance_cycles();
    for (auto& pou : prog_->pous_) resolve_body(*pou);
    resolve_configurations();
    index_statements();
    if (!errors_.empty()) throw CompileError(Phase::Resolve, std::move(errors_), prog_->origin());
    return prog_;
  }

 private:
  struct Ctx {
    PouInfo* pou = nullptr;
    int loop_depth = 0;
  };

  void error(const Span& span, std::string message) {
    errors_.push_back(Diagnostic{Phase::Resolve, std::move(message), span, {}});
  }

  // -- declarations ---------------------------------------------------------

  void declare_pous() {
    for (auto& decl : prog_->ast_.pous) {
      if (prog_->pou_index_.count(decl.name)) {
        error(decl.span, "duplicate declaration of POU '" + decl.name + "'");
        continue;
      }
      if (find_builtin_function(decl.name)) {
        error(decl.span, "POU name '" + decl.name + "' clashes with a standard function");
        continue;
      }
      auto info = std::make_unique<PouInfo>();
      info->name = decl.name;
      info->kind = decl.kind;
      info->decl = &decl;
      info->unit = prog_.get();
      prog_->pou_index_[decl.name] = info.get();
      prog_->pous_.push_back(std::move(info));
    }
  }

  std::optional<Type> resolve_type_spec(const TypeSpec& spec, bool allow_instance) {
    Type base;
    if (auto kind = elementary_from_name(spec.name)) {
      base = Type::of(*kind);
      if (*kind == TypeKind::String) {
        const auto len = spec.string_length.value_or(kDefaultStringLength);
        if (len == 0 || len > kMaxStringLength) {
          error(spec.span, "STRING length must be 1.." + std::to_string(kMaxStringLength));
          return std::nullopt;
        }
        base.length = len;
      } else if (spec.string_length) {
        error(spec.span, "only STRING takes a length");
        return std::nullopt;
      }
    } else if (const PouInfo* fb = prog_->find_pou(spec.name)) {
      if (fb->kind != PouKind::FunctionBlock) {
        error(spec.span, "'" + spec.name + "' is not a function block type");
        return std::nullopt;
      }
      if (!allow_instance || spec.array_bounds) {
        error(spec.span, "function block instances may only be declared in VAR sections of "
                         "function blocks and programs");
        return std::nullopt;
      }
      return Type::instance(fb);
    } else {
      error(spec.span, "unknown type '" + spec.name + "'");
      return std::nullopt;
    }
    if (spec.array_bounds) {
      const auto [lo, hi] = *spec.array_bounds;
      if (hi < lo || hi - lo >= 1'000'000) {
        error(spec.span, "invalid array bounds");
        return std::nullopt;
      }
      return Type::array(lo, hi, base);
    }
    return base;
  }

  void build_vars(PouInfo& pou) {
    const PouDecl& decl = *pou.decl;
    if (pou.kind == PouKind::Function) {
      VarInfo result;
      result.name = pou.name;
      result.section = Section::Local;
      if (auto t = resolve_type_spec(*decl.return_type, false)) {
        if (t->kind == TypeKind::Array) error(decl.return_type->span, "functions cannot return arrays");
        result.type = *t;
      }
      pou.return_type = result.type;
      pou.vars.push_back(std::move(result));
    }
    for (const auto& section : decl.sections) {
      for (const auto& v : section.vars) {
        if (pou.find(v.name)) {
          error(v.span, "duplicate declaration of '" + v.name + "' in " + pou.name);
          continue;
        }
        VarInfo info;
        info.name = v.name;
        info.section = section.kind;
        info.constant = section.constant;
        info.decl = &v;
        const bool may_instance = pou.kind != PouKind::Function &&
                                  (section.kind == Section::Local || section.kind == Section::Temp);
        auto type = resolve_type_spec(v.type, may_instance);
        if (!type) {
          info.type = Type::of(TypeKind::Void);
          pou.vars.push_back(std::move(info));
          continue;
        }
        info.type = *type;
        evaluate_initializer(pou, v, info);
        pou.vars.push_back(std::move(info));
      }
    }
  }

  void evaluate_initializer(PouInfo& pou, const VarDecl& v, VarInfo& info) {
    if (!v.init && v.init_list.empty()) {
      if (info.constant) error(v.span, "CONSTANT '" + v.name + "' needs an initial value");
      return;
    }
    if (info.type.kind == TypeKind::Instance) {
      error(v.span, "function block instances cannot be initialised");
      return;
    }
    auto constant_of = [&](ExprPtr& e, const Type& target) -> std::optional<Value> {
      Ctx ctx{&pou};
      const std::size_t before = errors_.size();
      const bool saved = constant_only_;
      constant_only_ = true;
      resolve_expr(e, ctx);
      constant_only_ = saved;
      if (errors_.size() != before) return std::nullopt;
      if (!coerce(e, target)) return std::nullopt;
      if (e->kind != ExprKind::Literal) {
        error(e->span, "initial value of '" + v.name + "' must be a constant literal");
        return std::nullopt;
      }
      return e->constant;
    };
    auto& decl = const_cast<VarDecl&>(v);
    if (info.type.kind == TypeKind::Array) {
      if (decl.init) {
        error(decl.init->span, "array '" + v.name + "' needs a [..] initializer");
        return;
      }
      if (static_cast<std::int64_t>(decl.init_list.size()) > info.type.array_size()) {
        error(v.span, "too many initial values for '" + v.name + "'");
        return;
      }
      for (auto& e : decl.init_list) {
        if (auto value = constant_of(e, *info.type.element)) info.init.push_back(*value);
      }
      return;
    }
    if (!decl.init_list.empty()) {
      error(v.span, "'" + v.name + "' is not an array");
      return;
    }
    if (auto value = constant_of(decl.init, info.type)) {
      if (value->kind() == TypeKind::String && value->as_string().size() > info.type.length) {
        error(decl.init->span, "initial string exceeds STRING(" + std::to_string(info.type.length) + ")");
        return;
      }
      info.init.push_back(*value);
    }
  }

  void check_instance_cycles() {
    std::set<const PouInfo*> done;
    std::vector<const PouInfo*> stack;
    std::function<bool(const PouInfo*)> visit = [&](const PouInfo* p) {
      if (p->unit != prog_.get() || done.count(p)) return false;
      if (std::find(stack.begin(), stack.end(), p) != stack.end()) return true;
      stack.push_back(p);
      for (const auto& v : p->vars) {
        if (v.type.kind == TypeKind::Instance && visit(v.type.pou)) return true;
      }
      stack.pop_back();
      done.insert(p);
      return false;
    };
    for (const auto& pou : prog_->pous_) {
      stack.clear();
      if (visit(pou.get())) {
        error(pou->decl->span, "function block '" + pou->name + "' contains itself");
        return;
      }
    }
  }

  // -- typing helpers -------------------------------------------------------

  static std::optional<Type> unify(const Type& a, const Type& b) {
    if (a.kind == b.kind) {
      if (a.kind == TypeKind::String) return Type::string(std::max(a.length, b.length));
      if (!is_elementary(a.kind) && !is_constant_kind(a.kind)) {
        return same_type(a, b) ? std::optional<Type>(a) : std::nullopt;
      }
      return a;
    }
    const bool ac = is_constant_kind(a.kind), bc = is_constant_kind(b.kind);
    if (ac || bc) {
      const Type& c = ac ? a : b;
      const Type& o = ac ? b : a;
      if (c.kind == TypeKind::AnyInt) {
        if (is_numeric(o.kind) || is_bit_string(o.kind)) return o;
        return std::nullopt;
      }
      // AnyReal
      if (o.kind == TypeKind::AnyInt) return c;
      if (is_real(o.kind)) return o;
      return std::nullopt;
    }
    if (widens_to(a.kind, b.kind)) return b;
    if (widens_to(b.kind, a.kind)) return a;
    return std::nullopt;
  }

  static TypeKind default_kind(TypeKind k) {
    if (k == TypeKind::AnyInt) return TypeKind::DInt;
    if (k == TypeKind::AnyReal) return TypeKind::LReal;
    return k;
  }

  /// Fixes the type of an untyped constant subtree, range-checking literals.
  bool settle(Expr& e, TypeKind target) {
    if (!is_constant_kind(e.type.kind)) return true;
    if (e.kind == ExprKind::Literal) {
      e.type = Type::of(target);
      if (is_real(target)) {
        const double v = e.literal_kind == LiteralKind::Int ? static_cast<double>(e.int_value)
                                                            : e.real_value;
        if (target == TypeKind::Real && std::fabs(v) > std::numeric_limits<float>::max()) {
          error(e.span, "literal exceeds REAL range");
          return false;
        }
        e.constant = Value::floating(target, v);
        return true;
      }
      const auto [lo, hi] = integer_range(target);
      if (e.int_value < lo || e.int_value > hi) {
        error(e.span, "literal " + std::to_string(e.int_value) + " exceeds " +
                          std::string(kind_name(target)) + " range " + std::to_string(lo) + ".." +
                          std::to_string(hi));
        return false;
      }
      e.constant = Value::wrapped(target, e.int_value);
      return true;
    }
    e.type = Type::of(target);
    if (e.kind == ExprKind::Binary && e.binary_op == BinaryOp::Pow) {
      return settle(*e.operands[0], target) &&
             settle(*e.operands[1], is_real(e.operands[1]->type.kind) ? target : TypeKind::DInt);
    }
    bool ok = true;
    for (auto& op : e.operands) ok = settle(*op, target) && ok;
    return ok;
  }

  void wrap_convert(ExprPtr& e, const Type& target) {
    auto conv = make_expr(ExprKind::Convert, e->span);
    conv->type = target;
    conv->operands.push_back(std::move(e));
    e = std::move(conv);
  }

  /// Makes `e` deliver a value of `target`: settles constants, inserts
  /// widening conversions, or reports a mismatch.
  bool coerce(ExprPtr& e, const Type& target) {
    const Type& from = e->type;
    if (from.kind == TypeKind::Void || target.kind == TypeKind::Void) return false;  // already reported
    if (is_constant_kind(from.kind)) {
      const bool ok = (from.kind == TypeKind::AnyInt &&
                       (is_integer(target.kind) || is_bit_string(target.kind) || is_real(target.kind))) ||
                      (from.kind == TypeKind::AnyReal && is_real(target.kind));
      if (!ok) {
        error(e->span, "type mismatch: constant of type " + std::string(kind_name(from.kind)) +
                           " is not assignable to " + type_name(target));
        return false;
      }
      if (is_constant_kind(target.kind)) return true;
      return settle(*e, target.kind);
    }
    if (from.kind == target.kind) {
      if (from.kind == TypeKind::Array || from.kind == TypeKind::Instance) {
        if (!same_type(from, target)) {
          error(e->span, "type mismatch: " + type_name(from) + " vs " + type_name(target));
          return false;
        }
      }
      return true;
    }
    if (widens_to(from.kind, target.kind)) {
      wrap_convert(e, target);
      return true;
    }
    error(e->span, "type mismatch: cannot convert " + type_name(from) + " to " + type_name(target) +
                       " implicitly");
    return false;
  }

  bool finalize(ExprPtr& e) {
    if (is_constant_kind(e->type.kind)) return settle(*e, default_kind(e->type.kind));
    return true;
  }

  static bool is_void(const Expr& e) { return e.type.kind == TypeKind::Void; }

  // -- expressions ----------------------------------------------------------

  void resolve_expr(ExprPtr& e, Ctx& ctx) {
    switch (e->kind) {
      case ExprKind::Literal: resolve_literal(*e); break;
      case ExprKind::Name: resolve_name(*e, ctx); break;
      case ExprKind::Member: resolve_member(*e, ctx); break;
      case ExprKind::Index: resolve_index(*e, ctx); break;
      case ExprKind::Unary: resolve_unary(e, ctx); break;
      case ExprKind::Binary: resolve_binary(*e, ctx); break;
      case ExprKind::Call: resolve_call(*e, ctx, false); break;
      case ExprKind::Convert: break;
    }
  }

  void resolve_literal(Expr& e) {
    switch (e.literal_kind) {
      case LiteralKind::Bool:
        e.type = Type::of(TypeKind::Bool);
        e.constant = Value::boolean(e.bool_value);
        break;
      case LiteralKind::Int: e.type = Type::of(TypeKind::AnyInt); break;
      case LiteralKind::Real: e.type = Type::of(TypeKind::AnyReal); break;
      case LiteralKind::Time:
        e.type = Type::of(TypeKind::Time);
        e.constant = Value::time(e.int_value);
        break;
      case LiteralKind::String:
        e.type = Type::string(std::max<std::uint32_t>(1, static_cast<std::uint32_t>(
                                                             std::min<std::size_t>(e.string_value.size(), kMaxStringLength))));
        e.constant = Value::string(e.string_value);
        break;
    }
  }

  void resolve_name(Expr& e, Ctx& ctx) {
    if (constant_only_) {
      error(e.span, "initial values must be constants; '" + e.name + "' is a variable");
      return;
    }
    if (auto slot = ctx.pou->find(e.name)) {
      e.binding = Binding{Binding::Scope::Local, *slot, nullptr};
      e.type = ctx.pou->vars[*slot].type;
      return;
    }
    error(e.span, "unknown identifier '" + e.name + "'");
  }

  void resolve_member(Expr& e, Ctx& ctx) {
    resolve_expr(e.operands[0], ctx);
    const Expr& base = *e.operands[0];
    if (is_void(base)) return;
    if (base.type.kind != TypeKind::Instance) {
      error(e.span, "'" + print_name(base) + "' is not a function block instance");
      return;
    }
    const PouInfo* fb = base.type.pou;
    auto slot = fb->find(e.name);
    if (!slot) {
      error(e.span, "function block " + fb->name + " has no member '" + e.name + "'");
      return;
    }
    const auto& var = fb->vars[*slot];
    if (var.section != Section::Input && var.section != Section::Output &&
        var.section != Section::InOut) {
      error(e.span, "member '" + e.name + "' of " + fb->name + " is internal");
      return;
    }
    e.binding = Binding{Binding::Scope::Local, *slot, fb};
    e.type = var.type;
  }

  static std::string print_name(const Expr& e) {
    if (e.kind == ExprKind::Name || e.kind == ExprKind::Member) return e.name;
    return "expression";
  }

  void resolve_index(Expr& e, Ctx& ctx) {
    resolve_expr(e.operands[0], ctx);
    resolve_expr(e.operands[1], ctx);
    const Expr& base = *e.operands[0];
    if (is_void(base) || is_void(*e.operands[1])) return;
    if (base.type.kind != TypeKind::Array) {
      error(e.span, "'" + print_name(base) + "' is not an array");
      return;
    }
    const auto k = e.operands[1]->type.kind;
    if (!is_integer(k) && !is_bit_string(k)) {
      error(e.operands[1]->span, "array index must be an integer");
      return;
    }
    if (is_constant_kind(k)) {
      if (!settle(*e.operands[1], TypeKind::DInt)) return;
      const auto idx = e.operands[1]->constant.as_int();
      if (idx < base.type.lower || idx > base.type.upper) {
        error(e.operands[1]->span, "index " + std::to_string(idx) + " outside array bounds");
        return;
      }
    }
    e.type = *base.type.element;
  }

  void resolve_unary(ExprPtr& e, Ctx& ctx) {
    resolve_expr(e->operands[0], ctx);
    Expr& operand = *e->operands[0];
    if (is_void(operand)) return;
    const auto k = operand.type.kind;
    switch (e->unary_op) {
      case UnaryOp::Neg:
      case UnaryOp::Plus:
        if (!is_numeric(k) && k != TypeKind::Time) {
          error(e->span, "unary " + std::string(e->unary_op == UnaryOp::Neg ? "-" : "+") +
                             " needs a numeric operand, got " + type_name(operand.type));
          return;
        }
        if (operand.kind == ExprKind::Literal && is_constant_kind(k)) {
          // fold into a signed literal so range checks see the final value
          ExprPtr lit = std::move(e->operands[0]);
          lit->span = e->span;
          if (e->unary_op == UnaryOp::Neg) {
            if (lit->literal_kind == LiteralKind::Int) lit->int_value = -lit->int_value;
            else lit->real_value = -lit->real_value;
          }
          e = std::move(lit);
          return;
        }
        e->type = operand.type;
        return;
      case UnaryOp::Not:
        if (k != TypeKind::Bool && !is_bit_string(k)) {
          error(e->span, "NOT needs a BOOL or bit-string operand, got " + type_name(operand.type));
          return;
        }
        e->type = operand.type;
        return;
    }
  }

  void resolve_binary(Expr& e, Ctx& ctx) {
    resolve_expr(e.operands[0], ctx);
    resolve_expr(e.operands[1], ctx);
    if (is_void(*e.operands[0]) || is_void(*e.operands[1])) return;
    const Type lt = e.operands[0]->type;
    const Type rt = e.operands[1]->type;
    const std::string op_desc = " (" + type_name(lt) + ", " + type_name(rt) + ")";
    switch (e.binary_op) {
      case BinaryOp::Or:
      case BinaryOp::Xor:
      case BinaryOp::And: {
        auto u = unify(lt, rt);
        if (u && u->kind == TypeKind::AnyInt) u = Type::of(TypeKind::Word);
        if (!u || (u->kind != TypeKind::Bool && !is_bit_string(u->kind))) {
          error(e.span, "logical operator needs BOOL or bit-string operands" + op_desc);
          return;
        }
        if (coerce(e.operands[0], *u) && coerce(e.operands[1], *u)) e.type = *u;
        return;
      }
      case BinaryOp::Eq:
      case BinaryOp::Ne:
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge: {
        auto u = unify(lt, rt);
        if (!u || !(is_elementary(u->kind) || is_constant_kind(u->kind))) {
          error(e.span, "cannot compare" + op_desc);
          return;
        }
        Type target = is_constant_kind(u->kind) ? Type::of(default_kind(u->kind)) : *u;
        if (coerce(e.operands[0], target) && coerce(e.operands[1], target)) {
          e.operand_type = target;
          e.type = Type::of(TypeKind::Bool);
        }
        return;
      }
      case BinaryOp::Add:
      case BinaryOp::Sub:
        if (lt.kind == TypeKind::Time && rt.kind == TypeKind::Time) {
          e.type = lt;
          return;
        }
        [[fallthrough]];
      case BinaryOp::Mul:
      case BinaryOp::Div: {
        const bool time_scale =
            (e.binary_op == BinaryOp::Mul || e.binary_op == BinaryOp::Div) &&
            lt.kind == TypeKind::Time && (is_integer(rt.kind) || is_real(rt.kind));
        if (time_scale) {
          if (finalize(e.operands[1])) e.type = lt;
          return;
        }
        if (e.binary_op == BinaryOp::Mul && rt.kind == TypeKind::Time && is_integer(lt.kind)) {
          if (finalize(e.operands[0])) e.type = rt;
          return;
        }
        auto u = unify(lt, rt);
        if (!u || !is_numeric(u->kind)) {
          error(e.span, "arithmetic needs numeric operands" + op_desc);
          return;
        }
        if (coerce(e.operands[0], *u) && coerce(e.operands[1], *u)) e.type = *u;
        return;
      }
      case BinaryOp::Mod: {
        auto u = unify(lt, rt);
        if (!u || !is_integer(u->kind)) {
          error(e.span, "MOD needs integer operands" + op_desc);
          return;
        }
        if (coerce(e.operands[0], *u) && coerce(e.operands[1], *u)) e.type = *u;
        return;
      }
      case BinaryOp::Pow: {
        if (!is_numeric(lt.kind) || !is_numeric(rt.kind)) {
          error(e.span, "** needs numeric operands" + op_desc);
          return;
        }
        Type result;
        if (is_real(lt.kind)) result = lt;
        else if (lt.kind == TypeKind::AnyInt && is_real(rt.kind)) result = rt.kind == TypeKind::AnyReal ? Type::of(TypeKind::AnyReal) : rt;
        else if (lt.kind == TypeKind::AnyInt) result = Type::of(TypeKind::AnyReal);
        else {
          error(e.span, "** needs a REAL or LREAL base" + op_desc);
          return;
        }
        if (!is_constant_kind(result.kind)) {
          if (!coerce(e.operands[0], result)) return;
          if (is_constant_kind(rt.kind) && !settle(*e.operands[1], is_real(rt.kind) ? result.kind : TypeKind::DInt))
            return;
        }
        e.type = result;
        return;
      }
    }
  }

  // -- calls ----------------------------------------------------------------

  bool is_lvalue(const Expr& e) const {
    if (e.kind == ExprKind::Name) return true;
    if (e.kind == ExprKind::Index) return is_lvalue(*e.operands[0]);
    return false;
  }

  void resolve_call(Expr& e, Ctx& ctx, bool statement) {
    if (constant_only_) {
      error(e.span, "initial values must be constants; calls are not allowed");
      return;
    }
    if (auto slot = ctx.pou->find(e.name)) {
      const auto& var = ctx.pou->vars[*slot];
      if (var.type.kind != TypeKind::Instance) {
        error(e.span, "'" + e.name + "' is not callable");
        return;
      }
      if (!statement) {
        error(e.span, "function block instance '" + e.name + "' cannot be called inside an expression");
        return;
      }
      resolve_fb_call(e, ctx, *slot, *var.type.pou);
      return;
    }
    if (const PouInfo* callee = prog_->find_pou(e.name)) {
      if (callee->kind != PouKind::Function) {
        error(e.span, "'" + e.name + "' is a " + std::string(pou_keyword(callee->kind)) +
                          " type; call an instance of it instead");
        return;
      }
      resolve_user_function_call(e, ctx, *callee);
      return;
    }
    if (const BuiltinFunction* fn = find_builtin_function(e.name)) {
      e.builtin = fn;
      resolve_builtin_call(e, ctx);
      return;
    }
    error(e.span, "unknown function '" + e.name + "'");
  }

  void resolve_fb_call(Expr& e, Ctx& ctx, std::uint32_t slot, const PouInfo& fb) {
    e.binding = Binding{Binding::Scope::Local, slot, &fb};
    e.type = Type::of(TypeKind::Void);
    std::set<std::string> seen;
    for (auto& arg : e.args) {
      if (arg.name.empty()) {
        error(arg.span, "function block calls need named arguments (NAME := value)");
        continue;
      }
      if (!seen.insert(arg.name).second) {
        error(arg.span, "argument '" + arg.name + "' given twice");
        continue;
      }
      auto param = fb.find(arg.name);
      if (!param) {
        error(arg.span, fb.name + " has no parameter '" + arg.name + "'");
        continue;
      }
      const auto& pv = fb.vars[*param];
      arg.slot = *param;
      resolve_expr(arg.value, ctx);
      if (is_void(*arg.value)) continue;
      if (arg.output) {
        if (pv.section != Section::Output) {
          error(arg.span, "'" + arg.name + "' is not an output of " + fb.name);
          continue;
        }
        check_assignable_target(*arg.value, ctx);
        if (!same_type(arg.value->type, pv.type) && !widens_to(pv.type.kind, arg.value->type.kind)) {
          error(arg.span, "type mismatch: output " + arg.name + " is " + type_name(pv.type) +
                              ", target is " + type_name(arg.value->type));
        }
        continue;
      }
      if (pv.section == Section::InOut) {
        if (!is_lvalue(*arg.value)) {
          error(arg.span, "VAR_IN_OUT '" + arg.name + "' needs a variable");
          continue;
        }
        check_assignable_target(*arg.value, ctx);
        if (!same_type(arg.value->type, pv.type)) {
          error(arg.span, "type mismatch: VAR_IN_OUT " + arg.name + " is " + type_name(pv.type));
        }
        continue;
      }
      if (pv.section != Section::Input) {
        error(arg.span, "'" + arg.name + "' is not an input of " + fb.name);
        continue;
      }
      coerce(arg.value, pv.type);
    }
  }

  void resolve_user_function_call(Expr& e, Ctx& ctx, const PouInfo& fn) {
    e.binding = Binding{Binding::Scope::Pou, 0, &fn};
    e.type = fn.return_type;
    std::vector<std::uint32_t> positional;
    for (std::uint32_t i = 0; i < fn.vars.size(); ++i) {
      if (fn.vars[i].section == Section::Input || fn.vars[i].section == Section::InOut)
        positional.push_back(i);
    }
    std::size_t next_positional = 0;
    std::set<std::uint32_t> seen;
    for (auto& arg : e.args) {
      std::optional<std::uint32_t> param;
      if (arg.name.empty()) {
        if (next_positional >= positional.size()) {
          error(arg.span, "too many arguments for " + fn.name + " (expects " +
                              std::to_string(positional.size()) + ")");
          continue;
        }
        param = positional[next_positional++];
      } else {
        param = fn.find(arg.name);
        if (!param || *param == 0) {
          error(arg.span, fn.name + " has no parameter '" + arg.name + "'");
          continue;
        }
      }
      if (!seen.insert(*param).second) {
        error(arg.span, "parameter '" + fn.vars[*param].name + "' given twice");
        continue;
      }
      arg.slot = *param;
      const auto& pv = fn.vars[*param];
      resolve_expr(arg.value, ctx);
      if (is_void(*arg.value)) continue;
      if (arg.output || pv.section == Section::Output) {
        if (!arg.output || pv.section != Section::Output) {
          error(arg.span, "output '" + pv.name + "' must be bound with =>");
          continue;
        }
        check_assignable_target(*arg.value, ctx);
        continue;
      }
      if (pv.section == Section::InOut) {
        if (!is_lvalue(*arg.value) || !same_type(arg.value->type, pv.type)) {
          error(arg.span, "VAR_IN_OUT '" + pv.name + "' needs a variable of type " + type_name(pv.type));
          continue;
        }
        check_assignable_target(*arg.value, ctx);
        continue;
      }
      if (pv.section != Section::Input) {
        error(arg.span, "'" + pv.name + "' is not a parameter of " + fn.name);
        continue;
      }
      coerce(arg.value, pv.type);
    }
  }

  bool expect_arity(const Expr& e, std::size_t min, std::size_t max) {
    if (e.args.size() < min || e.args.size() > max) {
      std::string expected = min == max ? std::to_string(min)
                             : max == SIZE_MAX ? "at least " + std::to_string(min)
                                               : std::to_string(min) + ".." + std::to_string(max);
      error(e.span, "wrong number of arguments for " + e.name + ": expected " + expected + ", got " +
                        std::to_string(e.args.size()));
      return false;
    }
    for (const auto& a : e.args) {
      if (a.output) {
        error(a.span, "standard function " + e.name + " has no outputs");
        return false;
      }
    }
    return true;
  }

  void resolve_builtin_call(Expr& e, Ctx& ctx) {
    const BuiltinFnId id = e.builtin->id;
    for (auto& a : e.args) resolve_expr(a.value, ctx);
    for (const auto& a : e.args) {
      if (is_void(*a.value)) return;
    }
    auto arg_type = [&](std::size_t i) { return e.args[i].value->type; };
    auto unify_args = [&](std::size_t first) -> std::optional<Type> {
      Type t = arg_type(first);
      for (std::size_t i = first + 1; i < e.args.size(); ++i) {
        auto u = unify(t, arg_type(i));
        if (!u) {
          error(e.args[i].span, "incompatible argument types for " + e.name);
          return std::nullopt;
        }
        t = *u;
      }
      if (is_constant_kind(t.kind)) t = Type::of(default_kind(t.kind));
      for (std::size_t i = first; i < e.args.size(); ++i) {
        if (!coerce(e.args[i].value, t)) return std::nullopt;
      }
      return t;
    };
    switch (id) {
      case BuiltinFnId::Abs: {
        if (!expect_arity(e, 1, 1)) return;
        if (!finalize(e.args[0].value)) return;
        const auto t = arg_type(0);
        if (!is_numeric(t.kind)) {
          error(e.span, "ABS needs a numeric argument");
          return;
        }
        e.type = t;
        return;
      }
      case BuiltinFnId::Min:
      case BuiltinFnId::Max: {
        if (!expect_arity(e, 2, SIZE_MAX)) return;
        auto t = unify_args(0);
        if (!t) return;
        if (!is_numeric(t->kind) && !is_bit_string(t->kind) && t->kind != TypeKind::Time &&
            t->kind != TypeKind::String) {
          error(e.span, e.name + " needs comparable arguments");
          return;
        }
        e.type = *t;
        return;
      }
      case BuiltinFnId::Limit: {
        if (!expect_arity(e, 3, 3)) return;
        auto t = unify_args(0);
        if (!t) return;
        if (!is_numeric(t->kind) && !is_bit_string(t->kind) && t->kind != TypeKind::Time) {
          error(e.span, "LIMIT needs numeric or TIME arguments");
          return;
        }
        e.type = *t;
        return;
      }
      case BuiltinFnId::Sel: {
        if (!expect_arity(e, 3, 3)) return;
        if (!coerce(e.args[0].value, Type::of(TypeKind::Bool))) return;
        auto t = unify_args(1);
        if (!t) return;
        e.type = *t;
        return;
      }
      case BuiltinFnId::Mux: {
        if (!expect_arity(e, 2, SIZE_MAX)) return;
        if (!is_integer(arg_type(0).kind) || !finalize(e.args[0].value)) {
          error(e.span, "MUX selector must be an integer");
          return;
        }
        auto t = unify_args(1);
        if (!t) return;
        e.type = *t;
        return;
      }
      case BuiltinFnId::Sin:
      case BuiltinFnId::Cos:
      case BuiltinFnId::Tan:
      case BuiltinFnId::Asin:
      case BuiltinFnId::Acos:
      case BuiltinFnId::Atan:
      case BuiltinFnId::Exp:
      case BuiltinFnId::Ln:
      case BuiltinFnId::Log:
      case BuiltinFnId::Sqrt: {
        if (!expect_arity(e, 1, 1)) return;
        const auto k = arg_type(0).kind;
        if (!is_real(k) && k != TypeKind::AnyInt) {
          error(e.span, e.name + " needs a REAL or LREAL argument (use an explicit conversion)");
          return;
        }
        if (is_constant_kind(k) && !settle(*e.args[0].value, TypeKind::LReal)) return;
        e.type = e.args[0].value->type;
        return;
      }
      case BuiltinFnId::Expt: {
        if (!expect_arity(e, 2, 2)) return;
        const auto k = arg_type(0).kind;
        if (!is_real(k) && k != TypeKind::AnyInt) {
          error(e.span, "EXPT needs a REAL or LREAL base");
          return;
        }
        if (is_constant_kind(k) && !settle(*e.args[0].value, TypeKind::LReal)) return;
        if (!is_numeric(arg_type(1).kind)) {
          error(e.span, "EXPT exponent must be numeric");
          return;
        }
        if (!finalize(e.args[1].value)) return;
        e.type = e.args[0].value->type;
        return;
      }
      case BuiltinFnId::Trunc: {
        if (!expect_arity(e, 1, 1)) return;
        if (!is_real(arg_type(0).kind)) {
          error(e.span, "TRUNC needs a REAL or LREAL argument");
          return;
        }
        if (!finalize(e.args[0].value)) return;
        e.type = Type::of(TypeKind::DInt);
        return;
      }
      case BuiltinFnId::Shl:
      case BuiltinFnId::Shr:
      case BuiltinFnId::Rol:
      case BuiltinFnId::Ror: {
        if (!expect_arity(e, 2, 2)) return;
        auto k = arg_type(0).kind;
        if (k == TypeKind::AnyInt) {
          if (!settle(*e.args[0].value, TypeKind::Word)) return;
          k = TypeKind::Word;
        }
        if (!is_bit_string(k)) {
          error(e.span, e.name + " needs a BYTE or WORD argument");
          return;
        }
        if (!is_integer(arg_type(1).kind) || !finalize(e.args[1].value)) {
          error(e.span, e.name + " shift count must be an integer");
          return;
        }
        e.type = e.args[0].value->type;
        return;
      }
      case BuiltinFnId::Concat: {
        if (!expect_arity(e, 2, SIZE_MAX)) return;
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (arg_type(i).kind != TypeKind::String) {
            error(e.args[i].span, "CONCAT needs STRING arguments");
            return;
          }
          total += arg_type(i).length;
        }
        e.type = Type::string(static_cast<std::uint32_t>(std::min<std::uint64_t>(total, kMaxStringLength)));
        return;
      }
      case BuiltinFnId::Len: {
        if (!expect_arity(e, 1, 1)) return;
        if (arg_type(0).kind != TypeKind::String) {
          error(e.span, "LEN needs a STRING argument");
          return;
        }
        e.type = Type::of(TypeKind::Int);
        return;
      }
      case BuiltinFnId::Mid:
      case BuiltinFnId::Left:
      case BuiltinFnId::Right: {
        const std::size_t n = id == BuiltinFnId::Mid ? 3 : 2;
        if (!expect_arity(e, n, n)) return;
        if (arg_type(0).kind != TypeKind::String) {
          error(e.span, e.name + " needs a STRING as first argument");
          return;
        }
        for (std::size_t i = 1; i < n; ++i) {
          if (!is_integer(arg_type(i).kind)) {
            error(e.args[i].span, e.name + " length/position must be an integer");
            return;
          }
          if (!coerce(e.args[i].value, Type::of(TypeKind::DInt))) return;
        }
        e.type = arg_type(0);
        return;
      }
      case BuiltinFnId::Find: {
        if (!expect_arity(e, 2, 2)) return;
        if (arg_type(0).kind != TypeKind::String || arg_type(1).kind != TypeKind::String) {
          error(e.span, "FIND needs STRING arguments");
          return;
        }
        e.type = Type::of(TypeKind::Int);
        return;
      }
      case BuiltinFnId::PlcMs: {
        if (!expect_arity(e, 0, 0)) return;
        e.type = Type::of(TypeKind::DInt);
        return;
      }
      case BuiltinFnId::Convert: {
        if (!expect_arity(e, 1, 1)) return;
        const auto [from, to] = *conversion_kinds(e.name);
        if (from == to) {
          error(e.span, "conversion " + e.name + " converts a type to itself");
          return;
        }
        Type from_type = from == TypeKind::String ? Type::string(arg_type(0).length) : Type::of(from);
        if (!coerce(e.args[0].value, from_type)) return;
        e.type = to == TypeKind::String ? Type::string() : Type::of(to);
        return;
      }
    }
  }

  // -- statements -----------------------------------------------------------

  void check_assignable_target(const Expr& target, Ctx& ctx) {
    const Expr* root = &target;
    while (root->kind == ExprKind::Index) root = root->operands[0].get();
    if (root->kind == ExprKind::Member) {
      const PouInfo* owner = root->binding.pou;
      const auto& var = owner->vars[root->binding.slot];
      error(target.span, std::string("cannot assign to ") +
                             (var.section == Section::Input ? "input" : "member") + " '" + root->name +
                             "' of another instance; pass it as a call argument");
      return;
    }
    if (root->kind != ExprKind::Name) {
      error(target.span, "assignment target must be a variable");
      return;
    }
    if (root->binding.scope != Binding::Scope::Local) return;  // unresolved, already reported
    const auto& var = ctx.pou->vars[root->binding.slot];
    if (var.constant) error(target.span, "cannot assign to CONSTANT '" + var.name + "'");
    if (var.type.kind == TypeKind::Instance) error(target.span, "cannot assign to function block instance '" + var.name + "'");
  }

  void resolve_statements(StmtList& list, Ctx& ctx) {
    for (auto& s : list) resolve_statement(*s, ctx);
  }

  void resolve_condition(ExprPtr& e, Ctx& ctx) {
    resolve_expr(e, ctx);
    if (is_void(*e)) return;
    if (e->type.kind != TypeKind::Bool) {
      error(e->span, "condition must be BOOL, got " + type_name(e->type));
      return;
    }
  }

  void resolve_statement(Stmt& s, Ctx& ctx) {
    switch (s.kind) {
      case StmtKind::Assign: {
        resolve_expr(s.target, ctx);
        resolve_expr(s.value, ctx);
        if (is_void(*s.target)) return;
        check_assignable_target(*s.target, ctx);
        if (is_void(*s.value)) return;
        coerce(s.value, s.target->type);
        return;
      }
      case StmtKind::Call:
        resolve_call(*s.value, ctx, true);
        return;
      case StmtKind::Exit:
        if (ctx.loop_depth == 0) error(s.span, "EXIT outside of a loop");
        return;
      case StmtKind::Return:
        return;
      case StmtKind::If:
        for (auto& b : s.branches) {
          resolve_condition(b.condition, ctx);
          resolve_statements(b.body, ctx);
        }
        resolve_statements(s.else_body, ctx);
        return;
      case StmtKind::Case: {
        resolve_expr(s.value, ctx);
        if (!is_void(*s.value)) {
          const auto k = s.value->type.kind;
          if (!is_integer(k) && !is_bit_string(k)) {
            error(s.value->span, "CASE selector must be an integer, got " + type_name(s.value->type));
          } else if (finalize(s.value)) {
            const auto [lo, hi] = integer_range(s.value->type.kind);
            std::vector<std::pair<std::int64_t, std::int64_t>> seen;
            for (const auto& branch : s.cases) {
              for (const auto& label : branch.labels) {
                if (label.lower < lo || label.upper > hi)
                  error(label.span, "CASE label outside the selector's range");
                for (const auto& [a, b] : seen) {
                  if (label.lower <= b && a <= label.upper) {
                    error(label.span, "duplicate CASE label");
                    break;
                  }
                }
                seen.emplace_back(label.lower, label.upper);
              }
            }
          }
        }
        for (auto& branch : s.cases) resolve_statements(branch.body, ctx);
        resolve_statements(s.else_body, ctx);
        return;
      }
      case StmtKind::For: {
        resolve_expr(s.target, ctx);
        resolve_expr(s.from, ctx);
        resolve_expr(s.to, ctx);
        if (s.by) resolve_expr(s.by, ctx);
        if (!is_void(*s.target)) {
          const auto k = s.target->type.kind;
          if (k != TypeKind::Int && k != TypeKind::DInt) {
            error(s.target->span, "FOR control variable must be INT or DINT");
          } else {
            check_assignable_target(*s.target, ctx);
            if (!is_void(*s.from)) coerce(s.from, s.target->type);
            if (!is_void(*s.to)) coerce(s.to, s.target->type);
            if (s.by && !is_void(*s.by) && coerce(s.by, s.target->type) &&
                s.by->kind == ExprKind::Literal && s.by->constant.as_int() == 0) {
              error(s.by->span, "FOR step must not be zero");
            }
          }
        }
        ++ctx.loop_depth;
        resolve_statements(s.body, ctx);
        --ctx.loop_depth;
        return;
      }
      case StmtKind::While:
        resolve_condition(s.value, ctx);
        ++ctx.loop_depth;
        resolve_statements(s.body, ctx);
        --ctx.loop_depth;
        return;
      case StmtKind::Repeat:
        ++ctx.loop_depth;
        resolve_statements(s.body, ctx);
        --ctx.loop_depth;
        resolve_condition(s.value, ctx);
        return;
    }
  }

  void resolve_body(PouInfo& pou) {
    Ctx ctx{&pou};
    resolve_statements(const_cast<PouDecl*>(pou.decl)->body, ctx);
  }

  void resolve_configurations() {
    for (const auto& config : prog_->ast_.configurations) {
      for (const auto& res : config.resources) {
        for (const auto& t : res.tasks) {
          if (t.interval_ms <= 0) error(t.span, "task interval must be positive");
          prog_->tasks_.push_back(TaskInfo{t.name, t.interval_ms, t.priority});
        }
        for (const auto& p : res.programs) {
          const PouInfo* type = prog_->find_pou(p.type);
          if (!type || type->kind != PouKind::Program) {
            error(p.span, "'" + p.type + "' is not a PROGRAM");
            continue;
          }
          if (!p.task.empty()) {
            const bool known = std::any_of(res.tasks.begin(), res.tasks.end(),
                                           [&](const TaskDecl& t) { return t.name == p.task; });
            if (!known) error(p.span, "unknown task '" + p.task + "'");
          }
          prog_->programs_.push_back(ProgramInstanceInfo{p.instance, p.task, type});
        }
      }
    }
  }

  void index_statements() {
    prog_->id_owner_.assign(prog_->ast_.statement_count, nullptr);
    prog_->id_site_.assign(prog_->ast_.statement_count, Span{});
    for (auto& pou : prog_->pous_) {
      std::function<void(const StmtList&)> walk = [&](const StmtList& list) {
        for (const auto& s : list) {
          auto record = [&](StatementId id, const Span& site) {
            if (id >= prog_->id_owner_.size()) return;
            prog_->id_owner_[id] = pou.get();
            prog_->id_site_[id] = site;
            pou->statements.push_back(id);
          };
          if (s->kind == StmtKind::If) {
            for (const auto& b : s->branches) {
              record(b.guard_id, b.guard_span);
              walk(b.body);
            }
            walk(s->else_body);
            continue;
          }
          record(s->id, s->site);
          for (const auto& c : s->cases) walk(c.body);
          walk(s->else_body);
          walk(s->body);
        }
      };
      walk(pou->decl->body);
      std::sort(pou->statements.begin(), pou->statements.end());
    }
  }

  std::shared_ptr<TypedProgram> prog_;
  std::vector<Diagnostic> errors_;
  bool constant_only_ = false;
};

std::shared_ptr<const TypedProgram> resolve(Ast ast,
                                            std::span<const std::shared_ptr<const TypedProgram>> libraries) {
  return Resolver(std::move(ast), libraries).run();
}

std::shared_ptr<const TypedProgram> compile(const SourceUnit& src,
                                            std::span<const std::shared_ptr<const TypedProgram>> libraries) {
  return resolve(parse_source(src), libraries);
}

}  // namespace sttest
