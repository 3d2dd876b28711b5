#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sttest::testkit {

namespace {

std::int64_t as_i(const OValue& v) {
  if (auto b = std::get_if<bool>(&v)) return *b;
  if (auto d = std::get_if<double>(&v)) return static_cast<std::int64_t>(*d);
  return std::get<std::int64_t>(v);
}
double as_d(const OValue& v) {
  if (auto d = std::get_if<double>(&v)) return *d;
  return static_cast<double>(as_i(v));
}
bool as_b(const OValue& v) { return std::get<bool>(v); }

std::int64_t wrap(std::int64_t v, int bits, bool is_signed) {
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(v) & mask;
  if (is_signed && (u >> (bits - 1))) return static_cast<std::int64_t>(u) - static_cast<std::int64_t>(mask) - 1;
  return static_cast<std::int64_t>(u);
}

OValue coerce(const std::string& type, std::uint32_t len, OValue v) {
  if (type == "INT") return wrap(as_i(v), 16, true);
  if (type == "DINT") return wrap(as_i(v), 32, true);
  if (type == "BYTE") return wrap(as_i(v), 8, false);
  if (type == "WORD") return wrap(as_i(v), 16, false);
  if (type == "REAL") return static_cast<double>(static_cast<float>(as_d(v)));
  if (type == "LREAL") return as_d(v);
  if (type == "STRING") {
    auto s = std::get<std::string>(v);
    if (s.size() > len) s.resize(len);
    return s;
  }
  return v;
}

OValue zero(const std::string& type) {
  if (type == "BOOL") return false;
  if (type == "REAL" || type == "LREAL") return 0.0;
  if (type == "STRING") return std::string();
  return std::int64_t{0};
}

bool builtin_fb(const std::string& t) {
  return t == "TON" || t == "R_TRIG" || t == "F_TRIG" || t == "CTU";
}

}  // namespace

OValue to_ovalue(const Value& v) {
  switch (v.kind()) {
    case TypeKind::Bool: return v.as_bool();
    case TypeKind::Real:
    case TypeKind::LReal: return v.as_real();
    case TypeKind::String: return v.as_string();
    default: return v.as_int();
  }
}

struct Oracle::Inst {
  std::string type;
  const PouDecl* decl = nullptr;
  std::map<std::string, OValue> vars;
  std::map<std::string, std::pair<std::string, std::uint32_t>> decl_types;
  std::map<std::string, std::unique_ptr<Inst>> kids;
  // builtin state
  bool prev = false;
  bool running = false;
  std::int64_t start = 0;
};

Oracle::Oracle(const Ast& ast, const std::string& fb, std::int64_t cycle_ms) : ast_(ast), cycle_ms_(cycle_ms) {
  root_ = make(fb, 0);
}

Oracle::~Oracle() = default;

std::unique_ptr<Oracle::Inst> Oracle::make(const std::string& type, std::uint32_t) {
  auto inst = std::make_unique<Inst>();
  inst->type = type;
  if (type == "TON") {
    inst->vars = {{"IN", false}, {"PT", std::int64_t{0}}, {"Q", false}, {"ET", std::int64_t{0}}};
    return inst;
  }
  if (type == "R_TRIG" || type == "F_TRIG") {
    inst->vars = {{"CLK", false}, {"Q", false}};
    return inst;
  }
  if (type == "CTU") {
    inst->vars = {{"CU", false}, {"R", false}, {"PV", std::int64_t{0}}, {"Q", false}, {"CV", std::int64_t{0}}};
    return inst;
  }
  for (const auto& p : ast_.pous) {
    if (p.name == type) inst->decl = &p;
  }
  if (!inst->decl) throw std::runtime_error("oracle: unsupported type " + type);
  for (const auto& sec : inst->decl->sections) {
    for (const auto& v : sec.vars) {
      if (v.type.array_bounds) throw std::runtime_error("oracle: arrays unsupported");
      const std::uint32_t len = v.type.string_length.value_or(80);
      bool user_fb = false;
      for (const auto& p : ast_.pous) user_fb |= p.name == v.type.name && p.kind == PouKind::FunctionBlock;
      if (builtin_fb(v.type.name) || user_fb) {
        inst->kids[v.name] = make(v.type.name, 0);
        continue;
      }
      inst->decl_types[v.name] = {v.type.name, len};
      OValue init = zero(v.type.name);
      if (v.init) init = eval(*v.init, *inst);
      inst->vars[v.name] = coerce(v.type.name, len, init);
    }
  }
  return inst;
}

void Oracle::hit(const Inst& self, StatementId id) { ++hits_[self.decl->name][id]; }

std::map<std::string, OValue> Oracle::step(const std::map<std::string, OValue>& inputs) {
  for (const auto& [k, v] : inputs) {
    const auto& t = root_->decl_types.at(k);
    root_->vars[k] = coerce(t.first, t.second, v);
  }
  run_list(root_->decl->body, *root_);
  std::map<std::string, OValue> out;
  for (const auto& sec : root_->decl->sections) {
    if (sec.kind != Section::Output) continue;
    for (const auto& v : sec.vars) out[v.name] = root_->vars.at(v.name);
  }
  now_ += cycle_ms_;
  return out;
}

Oracle::Flow Oracle::run_list(const StmtList& list, Inst& self) {
  for (const auto& s : list) {
    const Flow f = run(*s, self);
    if (f != Flow::Normal) return f;
  }
  return Flow::Normal;
}

Oracle::Flow Oracle::run(const Stmt& s, Inst& self) {
  switch (s.kind) {
    case StmtKind::Assign:
      hit(self, s.id);
      store(*s.target, eval(*s.value, self), self);
      return Flow::Normal;
    case StmtKind::Call:
      hit(self, s.id);
      call_fb(*s.value, self);
      return Flow::Normal;
    case StmtKind::Exit:
      hit(self, s.id);
      return Flow::Exit;
    case StmtKind::Return:
      hit(self, s.id);
      return Flow::Return;
    case StmtKind::If:
      for (const auto& b : s.branches) {
        hit(self, b.guard_id);
        if (as_b(eval(*b.condition, self))) return run_list(b.body, self);
      }
      return run_list(s.else_body, self);
    case StmtKind::Case: {
      hit(self, s.id);
      const std::int64_t k = as_i(eval(*s.value, self));
      for (const auto& c : s.cases) {
        for (const auto& l : c.labels) {
          if (k >= l.lower && k <= l.upper) return run_list(c.body, self);
        }
      }
      return run_list(s.else_body, self);
    }
    case StmtKind::While:
      for (;;) {
        hit(self, s.id);
        if (!as_b(eval(*s.value, self))) return Flow::Normal;
        const Flow f = run_list(s.body, self);
        if (f == Flow::Exit) return Flow::Normal;
        if (f == Flow::Return) return f;
      }
    case StmtKind::Repeat:
      for (;;) {
        const Flow f = run_list(s.body, self);
        if (f == Flow::Exit) return Flow::Normal;
        if (f == Flow::Return) return f;
        hit(self, s.id);
        if (as_b(eval(*s.value, self))) return Flow::Normal;
      }
    case StmtKind::For: {
      hit(self, s.id);
      const std::int64_t to = as_i(eval(*s.to, self));
      const std::int64_t by = s.by ? as_i(eval(*s.by, self)) : 1;
      store(*s.target, eval(*s.from, self), self);
      for (;;) {
        const std::int64_t i = as_i(eval(*s.target, self));
        if (by > 0 ? i > to : i < to) return Flow::Normal;
        const Flow f = run_list(s.body, self);
        if (f == Flow::Exit) return Flow::Normal;
        if (f == Flow::Return) return f;
        hit(self, s.id);
        store(*s.target, as_i(eval(*s.target, self)) + by, self);
      }
    }
  }
  return Flow::Normal;
}

void Oracle::call_fb(const Expr& call, Inst& self) {
  Inst& fb = *self.kids.at(call.name);
  std::vector<std::pair<const Expr*, std::string>> outs;
  for (const auto& a : call.args) {
    if (a.output) {
      outs.emplace_back(a.value.get(), a.name);
      continue;
    }
    OValue v = eval(*a.value, self);
    auto t = fb.decl_types.find(a.name);
    fb.vars[a.name] = t == fb.decl_types.end() ? v : coerce(t->second.first, t->second.second, v);
  }
  if (fb.decl) run_list(fb.decl->body, fb);
  else run_builtin(fb);
  for (const auto& [target, name] : outs) store(*target, fb.vars.at(name), self);
}

void Oracle::run_builtin(Inst& fb) {
  auto& v = fb.vars;
  if (fb.type == "TON") {
    if (as_b(v["IN"])) {
      if (!fb.running) {
        fb.running = true;
        fb.start = now_;
      }
      const std::int64_t et = std::min(now_ - fb.start, as_i(v["PT"]));
      v["ET"] = et;
      v["Q"] = et >= as_i(v["PT"]);
    } else {
      fb.running = false;
      v["ET"] = std::int64_t{0};
      v["Q"] = false;
    }
  } else if (fb.type == "R_TRIG") {
    const bool clk = as_b(v["CLK"]);
    v["Q"] = clk && !fb.prev;
    fb.prev = clk;
  } else if (fb.type == "F_TRIG") {
    const bool clk = as_b(v["CLK"]);
    v["Q"] = !clk && fb.prev;
    fb.prev = clk;
  } else if (fb.type == "CTU") {
    const bool cu = as_b(v["CU"]);
    if (as_b(v["R"])) v["CV"] = std::int64_t{0};
    else if (cu && !fb.prev && as_i(v["CV"]) < 32767) v["CV"] = as_i(v["CV"]) + 1;
    fb.prev = cu;
    v["Q"] = as_i(v["CV"]) >= as_i(v["PV"]);
  }
}

void Oracle::store(const Expr& target, OValue v, Inst& self) {
  if (target.kind != ExprKind::Name) throw std::runtime_error("oracle: unsupported store target");
  const auto& t = self.decl_types.at(target.name);
  self.vars[target.name] = coerce(t.first, t.second, std::move(v));
}

OValue Oracle::eval(const Expr& e, Inst& self) {
  switch (e.kind) {
    case ExprKind::Literal:
      switch (e.literal_kind) {
        case LiteralKind::Bool: return e.bool_value;
        case LiteralKind::Int:
        case LiteralKind::Time: return e.int_value;
        case LiteralKind::Real: return e.real_value;
        case LiteralKind::String: return e.string_value;
      }
      break;
    case ExprKind::Name: return self.vars.at(e.name);
    case ExprKind::Member: return self.kids.at(e.operands[0]->name)->vars.at(e.name);
    case ExprKind::Convert: return eval(*e.operands[0], self);
    case ExprKind::Unary: {
      OValue a = eval(*e.operands[0], self);
      if (e.unary_op == UnaryOp::Not) return !as_b(a);
      if (e.unary_op == UnaryOp::Plus) return a;
      if (auto d = std::get_if<double>(&a)) return -*d;
      return -as_i(a);
    }
    case ExprKind::Binary: {
      const OValue a = eval(*e.operands[0], self);
      const OValue b = eval(*e.operands[1], self);
      const bool real = std::holds_alternative<double>(a) || std::holds_alternative<double>(b);
      switch (e.binary_op) {
        case BinaryOp::Or: return as_b(a) || as_b(b);
        case BinaryOp::Xor: return as_b(a) != as_b(b);
        case BinaryOp::And: return as_b(a) && as_b(b);
        case BinaryOp::Eq:
          if (real) return as_d(a) == as_d(b);
          return a == b;
        case BinaryOp::Ne:
          if (real) return as_d(a) != as_d(b);
          return a != b;
        case BinaryOp::Lt: return real ? as_d(a) < as_d(b) : as_i(a) < as_i(b);
        case BinaryOp::Le: return real ? as_d(a) <= as_d(b) : as_i(a) <= as_i(b);
        case BinaryOp::Gt: return real ? as_d(a) > as_d(b) : as_i(a) > as_i(b);
        case BinaryOp::Ge: return real ? as_d(a) >= as_d(b) : as_i(a) >= as_i(b);
        case BinaryOp::Add: return real ? OValue(as_d(a) + as_d(b)) : OValue(as_i(a) + as_i(b));
        case BinaryOp::Sub: return real ? OValue(as_d(a) - as_d(b)) : OValue(as_i(a) - as_i(b));
        case BinaryOp::Mul: return real ? OValue(as_d(a) * as_d(b)) : OValue(as_i(a) * as_i(b));
        case BinaryOp::Div:
          if (real) return as_d(a) / as_d(b);
          if (as_i(b) == 0) throw std::runtime_error("oracle: division by zero");
          return as_i(a) / as_i(b);
        case BinaryOp::Mod:
          if (as_i(b) == 0) throw std::runtime_error("oracle: division by zero");
          return as_i(a) % as_i(b);
        case BinaryOp::Pow: return std::pow(as_d(a), as_d(b));
      }
      break;
    }
    case ExprKind::Call: return call_function(e, self);
    case ExprKind::Index: throw std::runtime_error("oracle: arrays unsupported");
  }
  throw std::runtime_error("oracle: unsupported expression");
}

OValue Oracle::call_function(const Expr& e, Inst& self) {
  std::vector<OValue> a;
  for (const auto& arg : e.args) a.push_back(eval(*arg.value, self));
  const std::string& f = e.name;
  if (f == "CONCAT") {
    std::string s;
    for (const auto& x : a) s += std::get<std::string>(x);
    return s;
  }
  if (f == "LEN") return static_cast<std::int64_t>(std::get<std::string>(a[0]).size());
  if (f == "MID") {
    const auto& s = std::get<std::string>(a[0]);
    const std::int64_t l = as_i(a[1]), p = as_i(a[2]);
    if (p < 1 || l < 0 || p + l - 1 > static_cast<std::int64_t>(s.size()))
      throw std::runtime_error("oracle: MID out of range");
    return s.substr(static_cast<std::size_t>(p - 1), static_cast<std::size_t>(l));
  }
  if (f == "ABS") {
    if (auto d = std::get_if<double>(&a[0])) return std::fabs(*d);
    return std::abs(as_i(a[0]));
  }
  if (f == "MIN" || f == "MAX") {
    OValue best = a[0];
    for (const auto& x : a) {
      if (f == "MIN" ? as_d(x) < as_d(best) : as_d(x) > as_d(best)) best = x;
    }
    return best;
  }
  if (f == "SEL") return as_b(a[0]) ? a[2] : a[1];
  throw std::runtime_error("oracle: unsupported function " + f);
}

}  // namespace sttest::testkit
