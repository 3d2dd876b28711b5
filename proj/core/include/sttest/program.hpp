#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sttest/ast.hpp"
#include "sttest/types.hpp"
#include "sttest/value.hpp"

namespace sttest {

enum class BuiltinFb { None, Ton, Tof, Tp, RTrig, FTrig, Ctu, Ctd };

struct VarInfo {
  std::string name;
  Type type;
  Section section = Section::Local;
  bool constant = false;
  /// Initial value for elementary variables, or per-element values for
  /// arrays. Empty means the type default.
  std::vector<Value> init;
  const VarDecl* decl = nullptr;  // null for built-in FB variables
};

class TypedProgram;

/// Symbol table entry for one POU (user-declared or built-in).
struct PouInfo {
  std::string name;
  PouKind kind = PouKind::FunctionBlock;
  BuiltinFb builtin = BuiltinFb::None;
  const PouDecl* decl = nullptr;       // null for built-ins
  const TypedProgram* unit = nullptr;  // owning compilation unit; null for built-ins
  Type return_type;                    // functions: the result slot type
  std::vector<VarInfo> vars;           // functions: slot 0 is the result variable
  std::vector<StatementId> statements; // Ids of every statement and guard site, ascending

  std::optional<std::uint32_t> find(std::string_view name) const;
  std::vector<std::uint32_t> slots_in(Section section) const;
};

struct TaskInfo {
  std::string name;
  std::int64_t interval_ms = 0;
  std::int64_t priority = 0;
};

struct ProgramInstanceInfo {
  std::string instance;
  std::string task;
  const PouInfo* program = nullptr;
};

/// Resolved compilation unit: the Ast plus symbol tables and types.
/// Immutable after resolve(); pointers into it stay valid for its lifetime.
class TypedProgram {
 public:
  const Ast& ast() const { return ast_; }
  const std::string& origin() const { return ast_.origin; }
  std::uint32_t statement_count() const { return ast_.statement_count; }

  /// POUs declared in this unit, in source order.
  const std::vector<std::unique_ptr<PouInfo>>& pous() const { return pous_; }
  /// Unit first, then libraries in order, then built-ins.
  const PouInfo* find_pou(std::string_view name) const;
  const PouInfo* find_local_pou(std::string_view name) const;

  const std::vector<std::shared_ptr<const TypedProgram>>& libraries() const { return libraries_; }
  const std::vector<TaskInfo>& tasks() const { return tasks_; }
  const std::vector<ProgramInstanceInfo>& program_instances() const { return programs_; }

  /// POU that owns a StatementId of this unit, or null.
  const PouInfo* pou_of(StatementId id) const;
  /// Statement or guard node carrying `id`, as (site span, statement).
  Span site_of(StatementId id) const;

 private:
  friend class Resolver;
  Ast ast_;
  std::vector<std::unique_ptr<PouInfo>> pous_;
  std::unordered_map<std::string, const PouInfo*> pou_index_;
  std::vector<std::shared_ptr<const TypedProgram>> libraries_;
  std::vector<TaskInfo> tasks_;
  std::vector<ProgramInstanceInfo> programs_;
  std::vector<const PouInfo*> id_owner_;
  std::vector<Span> id_site_;
};

/// Binds names, types every expression and links FB instances. Names are
/// searched in the unit, then `libraries` in order, then built-ins.
/// Throws CompileError(Phase::Resolve) listing every error found.
std::shared_ptr<const TypedProgram> resolve(
    Ast ast, std::span<const std::shared_ptr<const TypedProgram>> libraries = {});

/// parse_source + resolve.
std::shared_ptr<const TypedProgram> compile(
    const SourceUnit& src, std::span<const std::shared_ptr<const TypedProgram>> libraries = {});

/// A POU name that the program does not define, or of the wrong kind.
class UnknownPou : public std::runtime_error {
 public:
  explicit UnknownPou(const std::string& name, std::string_view expected = "POU")
      : std::runtime_error("unknown " + std::string(expected) + " '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Interface projection used by prompts and test-suite validation.
struct InterfaceVar {
  std::string name;
  Type type;
  Section section;
};
std::vector<InterfaceVar> interface_of(const PouInfo& pou);

}  // namespace sttest
