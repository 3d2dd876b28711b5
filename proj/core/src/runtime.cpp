#include "sttest/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>

#include "sttest/builtins.hpp"

namespace sttest {

// ---------------------------------------------------------------------------
// Faults, traces, monitor records
// ---------------------------------------------------------------------------

RuntimeFault::RuntimeFault(std::string message, StatementId statement, Span span, std::string pou)
    : std::runtime_error(describe(message, statement, span, pou, std::nullopt)),
      message_(std::move(message)),
      statement_(statement),
      span_(span),
      pou_(std::move(pou)) {}

RuntimeFault RuntimeFault::with_cycle(std::uint64_t cycle) const {
  RuntimeFault copy(message_, statement_, span_, pou_);
  copy.cycle_ = cycle;
  static_cast<std::runtime_error&>(copy) =
      std::runtime_error(describe(message_, statement_, span_, pou_, cycle));
  return copy;
}

std::string RuntimeFault::describe(const std::string& message, StatementId statement,
                                   const Span& span, const std::string& pou,
                                   std::optional<std::uint64_t> cycle) {
  std::string out = pou + ":" + std::to_string(span.begin.line) + ":" +
                    std::to_string(span.begin.column) + ": runtime fault";
  if (statement != kNoStatement) out += " in statement " + std::to_string(statement);
  if (cycle) out += " at cycle " + std::to_string(*cycle);
  return out + ": " + message;
}

std::map<std::string, std::vector<StatementId>> ExecTrace::by_pou() const {
  std::map<std::string, std::vector<StatementId>> out;
  for (const auto& e : entries) out[e.pou->name].push_back(e.id);
  return out;
}

std::string MonitorRecord::format() const {
  std::string out = "cycle=" + std::to_string(cycle) + " t=" + std::to_string(time_ms) + " events=[";
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) out += ';';
    out += events[i];
  }
  return out + "]";
}

std::optional<MonitorRecord> MonitorRecord::parse(std::string_view line) {
  MonitorRecord r;
  auto take_number = [&](std::string_view key, auto& out) {
    if (line.substr(0, key.size()) != key) return false;
    line.remove_prefix(key.size());
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos) return false;
    try {
      if constexpr (std::is_same_v<std::decay_t<decltype(out)>, std::uint64_t>) {
        out = std::stoull(std::string(line.substr(0, sp)));
      } else {
        out = std::stoll(std::string(line.substr(0, sp)));
      }
    } catch (const std::exception&) {
      return false;
    }
    line.remove_prefix(sp + 1);
    return true;
  };
  if (!take_number("cycle=", r.cycle) || !take_number("t=", r.time_ms)) return std::nullopt;
  if (line.substr(0, 8) != "events=[" || line.empty() || line.back() != ']') return std::nullopt;
  std::string_view body = line.substr(8, line.size() - 9);
  while (!body.empty()) {
    const auto semi = body.find(';');
    r.events.emplace_back(body.substr(0, semi));
    if (semi == std::string_view::npos) break;
    body.remove_prefix(semi + 1);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Values and storage
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxCallDepth = 64;
constexpr std::uint64_t kWatchdogIterations = 10'000'000;

Value fit(const Value& v, const Type& target) {
  if (target.kind == TypeKind::String) {
    if (v.as_string().size() <= target.length) return v;
    return Value::string(v.as_string().substr(0, target.length));
  }
  if (v.kind() == target.kind || !is_elementary(target.kind)) return v;
  if (is_real(target.kind)) return Value::floating(target.kind, v.as_real());
  return Value::wrapped(target.kind, v.as_int());
}

Slot initial_slot(const VarInfo& var) {
  const Type& t = var.type;
  if (t.kind == TypeKind::Instance) return std::make_unique<FbInstance>(*t.pou);
  if (t.kind == TypeKind::Array) {
    std::vector<Value> elems(static_cast<std::size_t>(t.array_size()), default_value(*t.element));
    for (std::size_t i = 0; i < var.init.size() && i < elems.size(); ++i) elems[i] = var.init[i];
    return elems;
  }
  return var.init.empty() ? default_value(t) : var.init.front();
}

Slot copy_slot(const Slot& s) {
  if (const auto* inst = std::get_if<std::unique_ptr<FbInstance>>(&s)) {
    return std::make_unique<FbInstance>(**inst);
  }
  if (const auto* v = std::get_if<Value>(&s)) return *v;
  return std::get<std::vector<Value>>(s);
}

bool assignable(const Value& v, const Type& target) {
  if (!is_elementary(target.kind)) return false;
  if (target.kind == TypeKind::String) {
    return v.kind() == TypeKind::String && v.as_string().size() <= target.length;
  }
  return widens_to(v.kind(), target.kind);
}

std::partial_ordering compare_values(const Value& a, const Value& b) {
  if (a.kind() == TypeKind::String) return a.as_string() <=> b.as_string();
  if (is_real(a.kind()) || is_real(b.kind())) return a.as_real() <=> b.as_real();
  return a.as_int() <=> b.as_int();
}

std::string display_for_string(const Value& v) {
  return v.kind() == TypeKind::String ? v.as_string() : v.to_display();
}

/// Explicit `X_TO_Y`. Returns nullopt with `error` set on overflow or
/// unparsable text.
std::optional<Value> convert_explicit(const Value& v, const Type& to, std::string& error) {
  const TypeKind from = v.kind();
  if (to.kind == TypeKind::String) return fit(Value::string(display_for_string(v)), to);
  if (from == TypeKind::String) return parse_value_literal(v.as_string(), to, error);
  if (to.kind == TypeKind::Bool) {
    return Value::boolean(is_real(from) ? v.as_real() != 0.0 : v.as_int() != 0);
  }
  if (is_real(to.kind)) {
    const double d = v.as_real();
    if (to.kind == TypeKind::Real && std::isfinite(d) &&
        std::fabs(d) > static_cast<double>(std::numeric_limits<float>::max())) {
      error = "value " + v.to_display() + " overflows REAL";
      return std::nullopt;
    }
    return Value::floating(to.kind, d);
  }
  std::int64_t x = 0;
  if (is_real(from)) {
    const double d = std::round(v.as_real());
    if (!std::isfinite(d) || d < -9.2e18 || d > 9.2e18) {
      error = "value " + v.to_display() + " cannot convert to " + std::string(kind_name(to.kind));
      return std::nullopt;
    }
    x = static_cast<std::int64_t>(d);
  } else {
    x = v.as_int();
  }
  if ((is_bit_string(to.kind) || is_bit_string(from)) && !is_real(from)) {
    return Value::wrapped(to.kind, x);
  }
  if (to.kind == TypeKind::Time) {
    if (x < 0) {
      error = "negative duration " + std::to_string(x) + " ms";
      return std::nullopt;
    }
    return Value::time(x);
  }
  const auto [lo, hi] = integer_range(to.kind);
  if (x < lo || x > hi) {
    error = "value " + v.to_display() + " overflows " + std::string(kind_name(to.kind));
    return std::nullopt;
  }
  return Value::wrapped(to.kind, x);
}

}  // namespace

Value default_value(const Type& type) {
  if (is_elementary(type.kind)) return Value::zero(type.kind);
  return Value();
}

FbInstance::FbInstance(const PouInfo& pou) : pou_(&pou) {
  slots_.reserve(pou.vars.size());
  for (const auto& v : pou.vars) slots_.push_back(initial_slot(v));
}

FbInstance::FbInstance(const FbInstance& other) : faulted(other.faulted), pou_(other.pou_) {
  slots_.reserve(other.slots_.size());
  for (const auto& s : other.slots_) slots_.push_back(copy_slot(s));
}

FbInstance& FbInstance::operator=(const FbInstance& other) {
  if (this != &other) {
    FbInstance copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Value& FbInstance::get(std::string_view name) const {
  const auto slot = pou_->find(name);
  if (!slot || !std::holds_alternative<Value>(slots_[*slot])) {
    throw std::out_of_range(pou_->name + " has no elementary variable '" + std::string(name) + "'");
  }
  return std::get<Value>(slots_[*slot]);
}

void FbInstance::set(std::string_view name, const Value& value) {
  const auto slot = pou_->find(name);
  if (!slot || !std::holds_alternative<Value>(slots_[*slot])) {
    throw InputError(pou_->name + " has no elementary variable '" + std::string(name) + "'");
  }
  const Type& t = pou_->vars[*slot].type;
  if (!assignable(value, t)) {
    throw InputError("value " + value.to_literal() + " is not assignable to " + std::string(name) +
                     " : " + sttest::type_name(t));
  }
  slots_[*slot] = fit(value, t);
}

const std::vector<Value>& FbInstance::array(std::string_view name) const {
  const auto slot = pou_->find(name);
  if (!slot || !std::holds_alternative<std::vector<Value>>(slots_[*slot])) {
    throw std::out_of_range(pou_->name + " has no array '" + std::string(name) + "'");
  }
  return std::get<std::vector<Value>>(slots_[*slot]);
}

const FbInstance& FbInstance::child(std::string_view name) const {
  const auto slot = pou_->find(name);
  if (!slot || !std::holds_alternative<std::unique_ptr<FbInstance>>(slots_[*slot])) {
    throw std::out_of_range(pou_->name + " has no instance '" + std::string(name) + "'");
  }
  return *std::get<std::unique_ptr<FbInstance>>(slots_[*slot]);
}

FbInstance& FbInstance::child(std::string_view name) {
  return const_cast<FbInstance&>(std::as_const(*this).child(name));
}

void FbInstance::reset_temps() {
  for (std::uint32_t i = 0; i < pou_->vars.size(); ++i) {
    if (pou_->vars[i].section == Section::Temp) slots_[i] = initial_slot(pou_->vars[i]);
  }
}

std::vector<std::string> FbInstance::snapshot() const {
  std::vector<std::string> out;
  snapshot_into("", out);
  return out;
}

void FbInstance::snapshot_into(const std::string& prefix, std::vector<std::string>& out) const {
  for (std::uint32_t i = 0; i < slots_.size(); ++i) {
    const std::string name = prefix + pou_->vars[i].name;
    if (const auto* v = std::get_if<Value>(&slots_[i])) {
      out.push_back(name + "=" + v->to_literal());
    } else if (const auto* arr = std::get_if<std::vector<Value>>(&slots_[i])) {
      const auto lower = pou_->vars[i].type.lower;
      for (std::size_t k = 0; k < arr->size(); ++k) {
        out.push_back(name + "[" + std::to_string(lower + static_cast<std::int64_t>(k)) +
                      "]=" + (*arr)[k].to_literal());
      }
    } else {
      std::get<std::unique_ptr<FbInstance>>(slots_[i])->snapshot_into(name + ".", out);
    }
  }
}

FbInstance instantiate(const TypedProgram& prog, std::string_view fb_name) {
  const PouInfo* pou = prog.find_pou(fb_name);
  if (!pou || pou->kind != PouKind::FunctionBlock) {
    throw UnknownPou(std::string(fb_name), "function block");
  }
  return FbInstance(*pou);
}

// ---------------------------------------------------------------------------
// Interpreter
// ---------------------------------------------------------------------------

namespace {

enum class Flow { Normal, Exit, Return };

struct Frame {
  const PouInfo* pou;
  Slot* slots;
};

class Interpreter {
 public:
  Interpreter(const TypedProgram* trace_unit, const SimClock& clock, ExecTrace* trace)
      : trace_unit_(trace_unit), clock_(clock), trace_(trace) {}

  void invoke(FbInstance& inst) {
    const PouInfo& pou = inst.pou();
    if (++depth_ > kMaxCallDepth) fault(Span{}, "call depth limit exceeded");
    inst.reset_temps();
    if (pou.builtin != BuiltinFb::None) {
      run_builtin_fb(inst);
    } else {
      Frame frame{&pou, inst.slot_count() ? &inst.slot(0) : nullptr};
      exec_list(pou.decl->body, frame);
    }
    --depth_;
  }

  /// Program body where FB calls at top level are individually contained.
  void run_isolated(FbInstance& program, std::vector<FaultRecord>& faults,
                    std::vector<std::string>& events, std::uint64_t cycle) {
    program.reset_temps();
    const PouInfo& pou = program.pou();
    Frame frame{&pou, program.slot_count() ? &program.slot(0) : nullptr};
    for (const auto& s : pou.decl->body) {
      FbInstance* callee = nullptr;
      if (s->kind == StmtKind::Call && s->value->binding.scope == Binding::Scope::Local &&
          s->value->binding.pou) {
        callee = std::get<std::unique_ptr<FbInstance>>(frame.slots[s->value->binding.slot]).get();
      }
      if (!callee) {
        if (exec(*s, frame) == Flow::Return) return;
        continue;
      }
      if (callee->faulted) continue;
      try {
        exec(*s, frame);
      } catch (const RuntimeFault& f) {
        callee->faulted = true;
        const std::string& name = pou.vars[s->value->binding.slot].name;
        faults.push_back(FaultRecord{cycle, name, f.message(), f.pou(), f.statement(), f.span()});
        events.push_back("FAULT=" + name);
        depth_ = 0;
      }
    }
  }

 private:
  [[noreturn]] void fault(const Span& span, const std::string& message) {
    throw RuntimeFault(message, current_id_, span, current_pou_ ? current_pou_->name : "?");
  }

  void enter(const PouInfo* pou, StatementId id) {
    current_pou_ = pou;
    current_id_ = id;
    if (trace_ && pou->unit == trace_unit_ && trace_unit_) trace_->entries.push_back({pou, id});
  }

  void tick(const Span& span) {
    if (++iterations_ > kWatchdogIterations) fault(span, "scan watchdog: loop iteration limit exceeded");
  }

  // -- statements -----------------------------------------------------------

  Flow exec_list(const StmtList& list, Frame& f) {
    for (const auto& s : list) {
      const Flow flow = exec(*s, f);
      if (flow != Flow::Normal) return flow;
    }
    return Flow::Normal;
  }

  Flow exec(const Stmt& s, Frame& f) {
    switch (s.kind) {
      case StmtKind::Assign:
        enter(f.pou, s.id);
        assign(*s.target, *s.value, f);
        return Flow::Normal;
      case StmtKind::Call:
        enter(f.pou, s.id);
        call_fb(*s.value, f);
        return Flow::Normal;
      case StmtKind::Exit:
        enter(f.pou, s.id);
        return Flow::Exit;
      case StmtKind::Return:
        enter(f.pou, s.id);
        return Flow::Return;
      case StmtKind::If:
        for (const auto& b : s.branches) {
          enter(f.pou, b.guard_id);
          if (eval(*b.condition, f).as_bool()) return exec_list(b.body, f);
        }
        return exec_list(s.else_body, f);
      case StmtKind::Case: {
        enter(f.pou, s.id);
        const auto sel = eval(*s.value, f).as_int();
        for (const auto& branch : s.cases) {
          for (const auto& label : branch.labels) {
            if (label.lower <= sel && sel <= label.upper) return exec_list(branch.body, f);
          }
        }
        return exec_list(s.else_body, f);
      }
      case StmtKind::For: return exec_for(s, f);
      case StmtKind::While:
        while (true) {
          enter(f.pou, s.id);
          if (!eval(*s.value, f).as_bool()) return Flow::Normal;
          const Flow flow = exec_list(s.body, f);
          if (flow == Flow::Exit) return Flow::Normal;
          if (flow == Flow::Return) return flow;
          tick(s.site);
        }
      case StmtKind::Repeat:
        while (true) {
          const Flow flow = exec_list(s.body, f);
          if (flow == Flow::Exit) return Flow::Normal;
          if (flow == Flow::Return) return flow;
          enter(f.pou, s.id);
          if (eval(*s.value, f).as_bool()) return Flow::Normal;
          tick(s.site);
        }
    }
    return Flow::Normal;
  }

  Flow exec_for(const Stmt& s, Frame& f) {
    enter(f.pou, s.id);
    const Type& t = s.target->type;
    const std::int64_t from = eval(*s.from, f).as_int();
    const std::int64_t to = eval(*s.to, f).as_int();
    const std::int64_t by = s.by ? eval(*s.by, f).as_int() : 1;
    if (by == 0) fault(s.site, "FOR step is zero");
    store(*s.target, Value::wrapped(t.kind, from), f);
    while (true) {
      const std::int64_t i = eval(*s.target, f).as_int();
      if (by > 0 ? i > to : i < to) return Flow::Normal;
      const Flow flow = exec_list(s.body, f);
      if (flow == Flow::Exit) return Flow::Normal;
      if (flow == Flow::Return) return flow;
      enter(f.pou, s.id);
      tick(s.site);
      const std::int64_t next = eval(*s.target, f).as_int() + by;
      // the loop ends when the increment leaves the control variable's range
      const auto [lo, hi] = integer_range(t.kind);
      if (next < lo || next > hi) return Flow::Normal;
      store(*s.target, Value::wrapped(t.kind, next), f);
    }
  }

  void assign(const Expr& target, const Expr& value, Frame& f) {
    if (target.type.kind == TypeKind::Array) {
      std::vector<Value> elems = std::get<std::vector<Value>>(slot_ref(value, f));
      std::get<std::vector<Value>>(slot_ref(target, f)) = std::move(elems);
      return;
    }
    store(target, eval(value, f), f);
  }

  void store(const Expr& target, const Value& v, Frame& f) {
    Value& ref = value_ref(target, f);
    ref = fit(v, target.type);
  }

  Slot& slot_ref(const Expr& e, Frame& f) {
    if (e.kind == ExprKind::Member) {
      FbInstance& inst = instance_of(*e.operands[0], f);
      return inst.slot(e.binding.slot);
    }
    return f.slots[e.binding.slot];
  }

  FbInstance& instance_of(const Expr& e, Frame& f) {
    return *std::get<std::unique_ptr<FbInstance>>(slot_ref(e, f));
  }

  Value& value_ref(const Expr& e, Frame& f) {
    if (e.kind == ExprKind::Index) {
      const Expr& base = *e.operands[0];
      auto& elems = std::get<std::vector<Value>>(slot_ref(base, f));
      const std::int64_t idx = eval(*e.operands[1], f).as_int();
      if (idx < base.type.lower || idx > base.type.upper) {
        fault(e.span, "array index " + std::to_string(idx) + " outside [" +
                          std::to_string(base.type.lower) + ".." + std::to_string(base.type.upper) +
                          "]");
      }
      return elems[static_cast<std::size_t>(idx - base.type.lower)];
    }
    return std::get<Value>(slot_ref(e, f));
  }

  Slot read_slot(const Expr& e, Frame& f) {
    if (e.type.kind == TypeKind::Array) return std::get<std::vector<Value>>(slot_ref(e, f));
    return eval(e, f);
  }

  void write_slot(const Expr& target, Slot&& value, Frame& f) {
    if (target.type.kind == TypeKind::Array) {
      std::get<std::vector<Value>>(slot_ref(target, f)) = std::get<std::vector<Value>>(std::move(value));
    } else {
      store(target, std::get<Value>(value), f);
    }
  }

  // -- calls ----------------------------------------------------------------

  void call_fb(const Expr& call, Frame& f) {
    FbInstance& inst = instance_of_call(call, f);
    const PouInfo& fb = inst.pou();
    for (const auto& arg : call.args) {
      if (arg.output) continue;
      const VarInfo& pv = fb.vars[arg.slot];
      if (pv.type.kind == TypeKind::Array || pv.section == Section::InOut) {
        inst.slot(arg.slot) = read_slot(*arg.value, f);
      } else {
        inst.slot(arg.slot) = fit(eval(*arg.value, f), pv.type);
      }
    }
    const auto saved_pou = current_pou_;
    const auto saved_id = current_id_;
    invoke(inst);
    current_pou_ = saved_pou;
    current_id_ = saved_id;
    for (const auto& arg : call.args) {
      const VarInfo& pv = fb.vars[arg.slot];
      if (arg.output || pv.section == Section::InOut) write_slot(*arg.value, copy_slot(inst.slot(arg.slot)), f);
    }
  }

  FbInstance& instance_of_call(const Expr& call, Frame& f) {
    return *std::get<std::unique_ptr<FbInstance>>(f.slots[call.binding.slot]);
  }

  Value call_function(const Expr& call, Frame& f) {
    if (call.builtin) return call_builtin(call, f);
    const PouInfo& fn = *call.binding.pou;
    std::vector<Slot> locals;
    locals.reserve(fn.vars.size());
    for (const auto& v : fn.vars) locals.push_back(initial_slot(v));
    for (const auto& arg : call.args) {
      if (arg.output) continue;
      const VarInfo& pv = fn.vars[arg.slot];
      if (pv.type.kind == TypeKind::Array || pv.section == Section::InOut) {
        locals[arg.slot] = read_slot(*arg.value, f);
      } else {
        locals[arg.slot] = fit(eval(*arg.value, f), pv.type);
      }
    }
    if (++depth_ > kMaxCallDepth) fault(call.span, "call depth limit exceeded in " + fn.name);
    const auto saved_pou = current_pou_;
    const auto saved_id = current_id_;
    Frame frame{&fn, locals.data()};
    exec_list(fn.decl->body, frame);
    current_pou_ = saved_pou;
    current_id_ = saved_id;
    --depth_;
    for (const auto& arg : call.args) {
      const VarInfo& pv = fn.vars[arg.slot];
      if (arg.output || pv.section == Section::InOut) write_slot(*arg.value, copy_slot(locals[arg.slot]), f);
    }
    return std::get<Value>(locals[0]);
  }

  // -- expressions ----------------------------------------------------------

  bool eval_bool(const Expr& e, Frame& f) { return eval(e, f).as_bool(); }

  Value eval(const Expr& e, Frame& f) {
    switch (e.kind) {
      case ExprKind::Literal: return e.constant;
      case ExprKind::Name:
      case ExprKind::Member:
      case ExprKind::Index: return value_ref(e, f);
      case ExprKind::Unary: return eval_unary(e, f);
      case ExprKind::Binary: return eval_binary(e, f);
      case ExprKind::Call: return call_function(e, f);
      case ExprKind::Convert: return fit(eval(*e.operands[0], f), e.type);
    }
    return Value();
  }

  Value eval_unary(const Expr& e, Frame& f) {
    const Value v = eval(*e.operands[0], f);
    const TypeKind k = e.type.kind;
    switch (e.unary_op) {
      case UnaryOp::Plus: return v;
      case UnaryOp::Neg:
        if (is_real(k)) return Value::floating(k, -v.as_real());
        return Value::wrapped(k, -v.as_int());
      case UnaryOp::Not:
        if (k == TypeKind::Bool) return Value::boolean(!v.as_bool());
        return Value::wrapped(k, ~v.as_int());
    }
    return v;
  }

  Value eval_binary(const Expr& e, Frame& f) {
    // both operands are always evaluated (no short-circuit)
    const Value a = eval(*e.operands[0], f);
    const Value b = eval(*e.operands[1], f);
    const TypeKind k = e.type.kind;
    switch (e.binary_op) {
      case BinaryOp::Or:
        if (k == TypeKind::Bool) return Value::boolean(a.as_bool() || b.as_bool());
        return Value::wrapped(k, a.as_int() | b.as_int());
      case BinaryOp::Xor:
        if (k == TypeKind::Bool) return Value::boolean(a.as_bool() != b.as_bool());
        return Value::wrapped(k, a.as_int() ^ b.as_int());
      case BinaryOp::And:
        if (k == TypeKind::Bool) return Value::boolean(a.as_bool() && b.as_bool());
        return Value::wrapped(k, a.as_int() & b.as_int());
      case BinaryOp::Eq: return Value::boolean(compare_values(a, b) == 0);
      case BinaryOp::Ne: return Value::boolean(!(compare_values(a, b) == 0));
      case BinaryOp::Lt: return Value::boolean(compare_values(a, b) < 0);
      case BinaryOp::Le: return Value::boolean(compare_values(a, b) <= 0);
      case BinaryOp::Gt: return Value::boolean(compare_values(a, b) > 0);
      case BinaryOp::Ge: return Value::boolean(compare_values(a, b) >= 0);
      case BinaryOp::Pow: return Value::floating(k, std::pow(a.as_real(), b.as_real()));
      default: break;
    }
    if (k == TypeKind::Time) return time_arith(e, a, b);
    if (is_real(k)) {
      const double x = a.as_real(), y = b.as_real();
      switch (e.binary_op) {
        case BinaryOp::Add: return Value::floating(k, x + y);
        case BinaryOp::Sub: return Value::floating(k, x - y);
        case BinaryOp::Mul: return Value::floating(k, x * y);
        default: return Value::floating(k, x / y);
      }
    }
    const std::int64_t x = a.as_int(), y = b.as_int();
    switch (e.binary_op) {
      case BinaryOp::Add: return Value::wrapped(k, x + y);
      case BinaryOp::Sub: return Value::wrapped(k, x - y);
      case BinaryOp::Mul: return Value::wrapped(k, x * y);
      case BinaryOp::Div:
        if (y == 0) fault(e.span, "integer division by zero");
        return Value::wrapped(k, x / y);
      case BinaryOp::Mod:
        if (y == 0) fault(e.span, "MOD by zero");
        return Value::wrapped(k, x % y);
      default: return Value();
    }
  }

  Value time_arith(const Expr& e, const Value& a, const Value& b) {
    switch (e.binary_op) {
      case BinaryOp::Add: return Value::time(a.as_int() + b.as_int());
      case BinaryOp::Sub: return Value::time(a.as_int() - b.as_int());
      case BinaryOp::Mul: {
        const Value& t = a.kind() == TypeKind::Time ? a : b;
        const Value& n = a.kind() == TypeKind::Time ? b : a;
        if (is_real(n.kind())) return Value::time(static_cast<std::int64_t>(std::trunc(t.as_real() * n.as_real())));
        return Value::time(t.as_int() * n.as_int());
      }
      default:
        if (is_real(b.kind())) {
          if (b.as_real() == 0.0) fault(e.span, "TIME division by zero");
          return Value::time(static_cast<std::int64_t>(std::trunc(a.as_real() / b.as_real())));
        }
        if (b.as_int() == 0) fault(e.span, "TIME division by zero");
        return Value::time(a.as_int() / b.as_int());
    }
  }

  Value call_builtin(const Expr& call, Frame& f) {
    std::vector<Value> args;
    args.reserve(call.args.size());
    for (const auto& a : call.args) args.push_back(eval(*a.value, f));
    const TypeKind k = call.type.kind;
    auto real_fn = [&](double (*fn)(double)) { return Value::floating(k, fn(args[0].as_real())); };
    auto pick = [&](bool want_max) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < args.size(); ++i) {
        const auto c = compare_values(args[i], args[best]);
        if (want_max ? c > 0 : c < 0) best = i;
      }
      return fit(args[best], call.type);
    };
    switch (call.builtin->id) {
      case BuiltinFnId::Abs:
        if (is_real(k)) return Value::floating(k, std::fabs(args[0].as_real()));
        return Value::wrapped(k, args[0].as_int() < 0 ? -args[0].as_int() : args[0].as_int());
      case BuiltinFnId::Min: return pick(false);
      case BuiltinFnId::Max: return pick(true);
      case BuiltinFnId::Limit: {
        const Value& lo = args[0];
        const Value& hi = args[2];
        if (compare_values(args[1], lo) < 0) return lo;
        if (compare_values(args[1], hi) > 0) return hi;
        return args[1];
      }
      case BuiltinFnId::Sel: return fit(args[0].as_bool() ? args[2] : args[1], call.type);
      case BuiltinFnId::Mux: {
        const std::int64_t sel = args[0].as_int();
        if (sel < 0 || sel >= static_cast<std::int64_t>(args.size()) - 1) {
          fault(call.span, "MUX selector " + std::to_string(sel) + " out of range");
        }
        return fit(args[static_cast<std::size_t>(sel) + 1], call.type);
      }
      case BuiltinFnId::Sin: return real_fn(std::sin);
      case BuiltinFnId::Cos: return real_fn(std::cos);
      case BuiltinFnId::Tan: return real_fn(std::tan);
      case BuiltinFnId::Asin: return real_fn(std::asin);
      case BuiltinFnId::Acos: return real_fn(std::acos);
      case BuiltinFnId::Atan: return real_fn(std::atan);
      case BuiltinFnId::Exp: return real_fn(std::exp);
      case BuiltinFnId::Ln: return real_fn(std::log);
      case BuiltinFnId::Log: return real_fn(std::log10);
      case BuiltinFnId::Sqrt: return real_fn(std::sqrt);
      case BuiltinFnId::Expt: return Value::floating(k, std::pow(args[0].as_real(), args[1].as_real()));
      case BuiltinFnId::Trunc: {
        const double d = std::trunc(args[0].as_real());
        if (!std::isfinite(d) || d < std::numeric_limits<std::int32_t>::min() ||
            d > std::numeric_limits<std::int32_t>::max()) {
          fault(call.span, "TRUNC of " + args[0].to_display() + " overflows DINT");
        }
        return Value::dint(static_cast<std::int32_t>(d));
      }
      case BuiltinFnId::Shl:
      case BuiltinFnId::Shr:
      case BuiltinFnId::Rol:
      case BuiltinFnId::Ror: return shift(call, args);
      case BuiltinFnId::Concat: {
        std::string s;
        for (const auto& a : args) s += a.as_string();
        return fit(Value::string(std::move(s)), call.type);
      }
      case BuiltinFnId::Len:
        return Value::wrapped(TypeKind::Int, static_cast<std::int64_t>(args[0].as_string().size()));
      case BuiltinFnId::Mid: {
        const std::string& s = args[0].as_string();
        const std::int64_t len = args[1].as_int(), pos = args[2].as_int();
        const auto size = static_cast<std::int64_t>(s.size());
        if (len < 0 || pos < 1 || pos + len - 1 > size) {
          fault(call.span, "MID(L := " + std::to_string(len) + ", P := " + std::to_string(pos) +
                               ") outside a string of length " + std::to_string(size));
        }
        return Value::string(s.substr(static_cast<std::size_t>(pos - 1), static_cast<std::size_t>(len)));
      }
      case BuiltinFnId::Left:
      case BuiltinFnId::Right: {
        const std::string& s = args[0].as_string();
        const std::int64_t len = args[1].as_int();
        if (len < 0 || len > static_cast<std::int64_t>(s.size())) {
          fault(call.span, call.name + " length " + std::to_string(len) + " outside a string of length " +
                               std::to_string(s.size()));
        }
        const auto n = static_cast<std::size_t>(len);
        return Value::string(call.builtin->id == BuiltinFnId::Left ? s.substr(0, n) : s.substr(s.size() - n));
      }
      case BuiltinFnId::Find: {
        const std::string& hay = args[0].as_string();
        const std::string& needle = args[1].as_string();
        const auto pos = needle.empty() ? std::string::npos : hay.find(needle);
        return Value::wrapped(TypeKind::Int, pos == std::string::npos ? 0 : static_cast<std::int64_t>(pos) + 1);
      }
      case BuiltinFnId::PlcMs: return Value::wrapped(TypeKind::DInt, clock_.now_ms);
      case BuiltinFnId::Convert: {
        std::string error;
        auto v = convert_explicit(args[0], call.type, error);
        if (!v) fault(call.span, call.name + ": " + error);
        return *v;
      }
    }
    return Value();
  }

  Value shift(const Expr& call, const std::vector<Value>& args) {
    const TypeKind k = call.type.kind;
    const int width = k == TypeKind::Byte ? 8 : 16;
    const std::uint64_t mask = (1u << width) - 1;
    const std::uint64_t v = static_cast<std::uint64_t>(args[0].as_int()) & mask;
    std::int64_t n = args[1].as_int();
    if (n < 0) fault(call.span, call.name + " with negative count " + std::to_string(n));
    switch (call.builtin->id) {
      case BuiltinFnId::Shl: return Value::wrapped(k, n >= width ? 0 : static_cast<std::int64_t>((v << n) & mask));
      case BuiltinFnId::Shr: return Value::wrapped(k, n >= width ? 0 : static_cast<std::int64_t>(v >> n));
      default: {
        n %= width;
        if (n == 0) return Value::wrapped(k, static_cast<std::int64_t>(v));
        const std::uint64_t r = call.builtin->id == BuiltinFnId::Rol ? ((v << n) | (v >> (width - n)))
                                                                      : ((v >> n) | (v << (width - n)));
        return Value::wrapped(k, static_cast<std::int64_t>(r & mask));
      }
    }
  }

  // -- standard function blocks --------------------------------------------

  void run_builtin_fb(FbInstance& inst) {
    auto val = [&](std::uint32_t i) -> Value& { return std::get<Value>(inst.slot(i)); };
    auto flag = [&](std::uint32_t i) { return val(i).as_bool(); };
    const std::int64_t now = clock_.now_ms;
    switch (inst.pou().builtin) {
      case BuiltinFb::Ton: {
        // IN PT Q ET M START RUNNING
        const std::int64_t pt = val(1).as_int();
        if (!flag(0)) {
          val(2) = Value::boolean(false);
          val(3) = Value::time(0);
          val(6) = Value::boolean(false);
        } else {
          if (!flag(6)) {
            val(6) = Value::boolean(true);
            val(5) = Value::time(now);
          }
          const std::int64_t et = std::min(now - val(5).as_int(), pt);
          val(3) = Value::time(et);
          val(2) = Value::boolean(et >= pt);
        }
        val(4) = val(0);
        return;
      }
      case BuiltinFb::Tof: {
        const std::int64_t pt = val(1).as_int();
        if (flag(0)) {
          val(2) = Value::boolean(true);
          val(3) = Value::time(0);
          val(6) = Value::boolean(false);
        } else {
          if (flag(4)) {
            val(6) = Value::boolean(true);
            val(5) = Value::time(now);
          }
          if (flag(6)) {
            const std::int64_t et = std::min(now - val(5).as_int(), pt);
            val(3) = Value::time(et);
            val(2) = Value::boolean(et < pt);
            if (et >= pt) val(6) = Value::boolean(false);
          }
        }
        val(4) = val(0);
        return;
      }
      case BuiltinFb::Tp: {
        const std::int64_t pt = val(1).as_int();
        if (!flag(6) && flag(0) && !flag(4) && !flag(2)) {
          val(6) = Value::boolean(true);
          val(5) = Value::time(now);
        }
        if (flag(6)) {
          const std::int64_t et = std::min(now - val(5).as_int(), pt);
          val(3) = Value::time(et);
          val(2) = Value::boolean(et < pt);
          if (et >= pt) val(6) = Value::boolean(false);
        } else {
          val(2) = Value::boolean(false);
          if (!flag(0)) val(3) = Value::time(0);
        }
        val(4) = val(0);
        return;
      }
      case BuiltinFb::RTrig:
        // CLK Q M
        val(1) = Value::boolean(flag(0) && !flag(2));
        val(2) = val(0);
        return;
      case BuiltinFb::FTrig:
        val(1) = Value::boolean(!flag(0) && flag(2));
        val(2) = val(0);
        return;
      case BuiltinFb::Ctu: {
        // CU R PV Q CV M
        std::int64_t cv = val(4).as_int();
        if (flag(1)) cv = 0;
        else if (flag(0) && !flag(5) && cv < 32767) ++cv;
        val(4) = Value::wrapped(TypeKind::Int, cv);
        val(3) = Value::boolean(cv >= val(2).as_int());
        val(5) = val(0);
        return;
      }
      case BuiltinFb::Ctd: {
        // CD LD PV Q CV M
        std::int64_t cv = val(4).as_int();
        if (flag(1)) cv = val(2).as_int();
        else if (flag(0) && !flag(5) && cv > -32768) --cv;
        val(4) = Value::wrapped(TypeKind::Int, cv);
        val(3) = Value::boolean(cv <= 0);
        val(5) = val(0);
        return;
      }
      case BuiltinFb::None: return;
    }
  }

  const TypedProgram* trace_unit_;
  const SimClock& clock_;
  ExecTrace* trace_;
  const PouInfo* current_pou_ = nullptr;
  StatementId current_id_ = kNoStatement;
  int depth_ = 0;
  std::uint64_t iterations_ = 0;
};

}  // namespace

CycleResult execute_cycle(FbInstance& inst, const std::map<std::string, Value>& inputs, SimClock& clock) {
  const PouInfo& pou = inst.pou();
  for (const auto& [name, value] : inputs) {
    const auto slot = pou.find(name);
    if (!slot || pou.vars[*slot].section != Section::Input) {
      throw InputError("'" + name + "' is not a VAR_INPUT of " + pou.name);
    }
    inst.set(name, value);
  }
  CycleResult result;
  Interpreter interp(pou.unit, clock, &result.trace);
  interp.invoke(inst);
  for (std::uint32_t i = 0; i < pou.vars.size(); ++i) {
    if (pou.vars[i].section != Section::Output) continue;
    if (const auto* v = std::get_if<Value>(&inst.slot(i))) result.outputs.emplace(pou.vars[i].name, *v);
  }
  clock.advance();
  return result;
}

ProgramRun run_program(const TypedProgram& prog, std::string_view program_name, const RunOptions& options,
                       SimClock& clock, const MonitorSink& monitor) {
  const PouInfo* pou = prog.find_pou(program_name);
  if (!pou || pou->kind != PouKind::Program) throw UnknownPou(std::string(program_name), "PROGRAM");
  ProgramRun run;
  run.program = std::make_unique<FbInstance>(*pou);
  FbInstance& program = *run.program;

  std::vector<std::uint32_t> hooks;
  std::vector<Value> previous;
  for (std::uint32_t i = 0; i < pou->vars.size(); ++i) {
    if (const auto* v = std::get_if<Value>(&program.slot(i))) {
      hooks.push_back(i);
      previous.push_back(*v);
    }
  }

  ExecTrace trace;
  for (std::uint64_t cycle = 1; cycle <= options.cycles; ++cycle) {
    trace.clear();
    std::vector<std::string> fault_events;
    Interpreter interp(&prog, clock, &trace);
    try {
      if (options.isolate_faults) {
        interp.run_isolated(program, run.faults, fault_events, cycle);
      } else {
        interp.invoke(program);
      }
    } catch (const RuntimeFault& f) {
      throw f.with_cycle(cycle);
    }
    MonitorRecord record{cycle, clock.now_ms, {}};
    for (std::size_t h = 0; h < hooks.size(); ++h) {
      const Value& now = std::get<Value>(program.slot(hooks[h]));
      if (!(now == previous[h])) {
        record.events.push_back(pou->vars[hooks[h]].name + "=" + now.to_literal());
        previous[h] = now;
      }
    }
    record.events.insert(record.events.end(), fault_events.begin(), fault_events.end());
    if (monitor) monitor(record);
    if (options.on_trace) options.on_trace(trace);
    if (options.keep_trace) {
      run.trace.entries.insert(run.trace.entries.end(), trace.entries.begin(), trace.entries.end());
    }
    clock.advance();
    run.cycles_executed = cycle;
    if (options.stop_when && options.stop_when(program)) break;
  }
  return run;
}

}  // namespace sttest
