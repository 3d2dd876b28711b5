#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>

#include "sttest/ast.hpp"
#include "sttest/value.hpp"

namespace sttest::testkit {

// Reference interpreter: walks the parsed AST by name, with its own value
// model. Covers the subset used by the corpus (no arrays, no functions
// beyond a handful of standard ones).
using OValue = std::variant<bool, std::int64_t, double, std::string>;

OValue to_ovalue(const Value& v);

class Oracle {
 public:
  Oracle(const Ast& ast, const std::string& fb, std::int64_t cycle_ms);
  ~Oracle();

  std::map<std::string, OValue> step(const std::map<std::string, OValue>& inputs);

  /// Hit counts of executed statements only, per POU.
  const std::map<std::string, std::map<StatementId, std::uint64_t>>& hits() const { return hits_; }
  std::int64_t now() const { return now_; }

 private:
  struct Inst;
  enum class Flow { Normal, Exit, Return };

  std::unique_ptr<Inst> make(const std::string& type, std::uint32_t len);
  Flow run_list(const StmtList& list, Inst& self);
  Flow run(const Stmt& s, Inst& self);
  void call_fb(const Expr& call, Inst& self);
  void run_builtin(Inst& fb);
  OValue eval(const Expr& e, Inst& self);
  OValue call_function(const Expr& e, Inst& self);
  void store(const Expr& target, OValue v, Inst& self);
  void hit(const Inst& self, StatementId id);

  const Ast& ast_;
  std::unique_ptr<Inst> root_;
  std::int64_t cycle_ms_;
  std::int64_t now_ = 0;
  std::map<std::string, std::map<StatementId, std::uint64_t>> hits_;
};

}  // namespace sttest::testkit
