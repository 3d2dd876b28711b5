#include "sttest/builtins.hpp"

#include <array>
#include <memory>

namespace sttest {

namespace {

constexpr std::array kFunctions = {
    BuiltinFunction{BuiltinFnId::Abs, "ABS"},     BuiltinFunction{BuiltinFnId::Min, "MIN"},
    BuiltinFunction{BuiltinFnId::Max, "MAX"},     BuiltinFunction{BuiltinFnId::Limit, "LIMIT"},
    BuiltinFunction{BuiltinFnId::Sel, "SEL"},     BuiltinFunction{BuiltinFnId::Mux, "MUX"},
    BuiltinFunction{BuiltinFnId::Sin, "SIN"},     BuiltinFunction{BuiltinFnId::Cos, "COS"},
    BuiltinFunction{BuiltinFnId::Tan, "TAN"},     BuiltinFunction{BuiltinFnId::Asin, "ASIN"},
    BuiltinFunction{BuiltinFnId::Acos, "ACOS"},   BuiltinFunction{BuiltinFnId::Atan, "ATAN"},
    BuiltinFunction{BuiltinFnId::Exp, "EXP"},     BuiltinFunction{BuiltinFnId::Ln, "LN"},
    BuiltinFunction{BuiltinFnId::Log, "LOG"},     BuiltinFunction{BuiltinFnId::Sqrt, "SQRT"},
    BuiltinFunction{BuiltinFnId::Expt, "EXPT"},   BuiltinFunction{BuiltinFnId::Trunc, "TRUNC"},
    BuiltinFunction{BuiltinFnId::Shl, "SHL"},     BuiltinFunction{BuiltinFnId::Shr, "SHR"},
    BuiltinFunction{BuiltinFnId::Rol, "ROL"},     BuiltinFunction{BuiltinFnId::Ror, "ROR"},
    BuiltinFunction{BuiltinFnId::Concat, "CONCAT"}, BuiltinFunction{BuiltinFnId::Len, "LEN"},
    BuiltinFunction{BuiltinFnId::Mid, "MID"},     BuiltinFunction{BuiltinFnId::Left, "LEFT"},
    BuiltinFunction{BuiltinFnId::Right, "RIGHT"}, BuiltinFunction{BuiltinFnId::Find, "FIND"},
    BuiltinFunction{BuiltinFnId::PlcMs, "T_PLC_MS"},
};

constexpr BuiltinFunction kConvert{BuiltinFnId::Convert, "X_TO_Y"};

VarInfo var(std::string name, TypeKind kind, Section section) {
  VarInfo v;
  v.name = std::move(name);
  v.type = Type::of(kind);
  v.section = section;
  return v;
}

std::unique_ptr<PouInfo> make_fb(std::string name, BuiltinFb kind, std::vector<VarInfo> vars) {
  auto pou = std::make_unique<PouInfo>();
  pou->name = std::move(name);
  pou->kind = PouKind::FunctionBlock;
  pou->builtin = kind;
  pou->vars = std::move(vars);
  return pou;
}

struct BuiltinFbTable {
  std::vector<std::unique_ptr<PouInfo>> fbs;

  BuiltinFbTable() {
    using S = Section;
    using K = TypeKind;
    auto timer = [](std::string name, BuiltinFb kind) {
      return make_fb(std::move(name), kind,
                     {var("IN", K::Bool, S::Input), var("PT", K::Time, S::Input),
                      var("Q", K::Bool, S::Output), var("ET", K::Time, S::Output),
                      var("M", K::Bool, S::Local), var("START", K::Time, S::Local),
                      var("RUNNING", K::Bool, S::Local)});
    };
    fbs.push_back(timer("TON", BuiltinFb::Ton));
    fbs.push_back(timer("TOF", BuiltinFb::Tof));
    fbs.push_back(timer("TP", BuiltinFb::Tp));
    fbs.push_back(make_fb("R_TRIG", BuiltinFb::RTrig,
                          {var("CLK", K::Bool, S::Input), var("Q", K::Bool, S::Output),
                           var("M", K::Bool, S::Local)}));
    fbs.push_back(make_fb("F_TRIG", BuiltinFb::FTrig,
                          {var("CLK", K::Bool, S::Input), var("Q", K::Bool, S::Output),
                           var("M", K::Bool, S::Local)}));
    fbs.push_back(make_fb("CTU", BuiltinFb::Ctu,
                          {var("CU", K::Bool, S::Input), var("R", K::Bool, S::Input),
                           var("PV", K::Int, S::Input), var("Q", K::Bool, S::Output),
                           var("CV", K::Int, S::Output), var("M", K::Bool, S::Local)}));
    fbs.push_back(make_fb("CTD", BuiltinFb::Ctd,
                          {var("CD", K::Bool, S::Input), var("LD", K::Bool, S::Input),
                           var("PV", K::Int, S::Input), var("Q", K::Bool, S::Output),
                           var("CV", K::Int, S::Output), var("M", K::Bool, S::Local)}));
  }
};

const BuiltinFbTable& fb_table() {
  static const BuiltinFbTable table;
  return table;
}

}  // namespace

std::optional<std::pair<TypeKind, TypeKind>> conversion_kinds(std::string_view name) {
  const auto pos = name.find("_TO_");
  if (pos == std::string_view::npos) return std::nullopt;
  const auto from = elementary_from_name(name.substr(0, pos));
  const auto to = elementary_from_name(name.substr(pos + 4));
  if (!from || !to) return std::nullopt;
  return std::make_pair(*from, *to);
}

const BuiltinFunction* find_builtin_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  if (conversion_kinds(name)) return &kConvert;
  return nullptr;
}

const PouInfo* find_builtin_fb(std::string_view name) {
  for (const auto& fb : fb_table().fbs) {
    if (fb->name == name) return fb.get();
  }
  return nullptr;
}

}  // namespace sttest
