#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sttest/program.hpp"
#include "sttest/value.hpp"

namespace sttest {

/// Simulated PLC clock. `now_ms` only moves between scans.
struct SimClock {
  std::int64_t now_ms = 0;
  std::int64_t cycle_time_ms = 10;

  void advance() { now_ms += cycle_time_ms; }
};

/// Statements executed during one scan, in execution order.
struct ExecTrace {
  struct Entry {
    const PouInfo* pou = nullptr;
    StatementId id = kNoStatement;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  void clear() { entries.clear(); }
  bool empty() const { return entries.empty(); }
  /// Ids grouped by POU name, each list in execution order.
  std::map<std::string, std::vector<StatementId>> by_pou() const;
  friend bool operator==(const ExecTrace&, const ExecTrace&) = default;
};

class RuntimeFault : public std::runtime_error {
 public:
  RuntimeFault(std::string message, StatementId statement, Span span, std::string pou);

  const std::string& message() const { return message_; }
  StatementId statement() const { return statement_; }
  const Span& span() const { return span_; }
  const std::string& pou() const { return pou_; }
  std::optional<std::uint64_t> cycle() const { return cycle_; }

  RuntimeFault with_cycle(std::uint64_t cycle) const;

 private:
  static std::string describe(const std::string& message, StatementId statement, const Span& span,
                              const std::string& pou, std::optional<std::uint64_t> cycle);

  std::string message_;
  StatementId statement_;
  Span span_;
  std::string pou_;
  std::optional<std::uint64_t> cycle_;
};

/// Raised by execute_cycle for inputs that are not VAR_INPUTs or do not fit.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FbInstance;

/// Storage for one variable: elementary value, array elements or nested instance.
using Slot = std::variant<Value, std::vector<Value>, std::unique_ptr<FbInstance>>;

/// Default value of a declared type (FALSE, 0, T#0s, '').
Value default_value(const Type& type);

/// Runtime state of one function block or program instance.
class FbInstance {
 public:
  explicit FbInstance(const PouInfo& pou);
  FbInstance(const FbInstance& other);
  FbInstance& operator=(const FbInstance& other);
  FbInstance(FbInstance&&) noexcept = default;
  FbInstance& operator=(FbInstance&&) noexcept = default;

  const PouInfo& pou() const { return *pou_; }
  const std::string& type_name() const { return pou_->name; }

  bool has(std::string_view name) const { return pou_->find(name).has_value(); }
  /// Elementary variable by name; throws std::out_of_range otherwise.
  const Value& get(std::string_view name) const;
  /// Writes an elementary variable, converting along the promotion lattice.
  void set(std::string_view name, const Value& value);
  const std::vector<Value>& array(std::string_view name) const;
  const FbInstance& child(std::string_view name) const;
  FbInstance& child(std::string_view name);

  Slot& slot(std::uint32_t index) { return slots_[index]; }
  const Slot& slot(std::uint32_t index) const { return slots_[index]; }
  std::size_t slot_count() const { return slots_.size(); }

  /// Re-initialises VAR_TEMP slots; called at the start of every invocation.
  void reset_temps();

  /// Flattened `name=literal` view of every variable, nested instances as
  /// `inst.member`; arrays as `name[i]`. Declaration order.
  std::vector<std::string> snapshot() const;

  bool faulted = false;  // set by run_program when fault isolation disabled this instance

 private:
  void snapshot_into(const std::string& prefix, std::vector<std::string>& out) const;

  const PouInfo* pou_;
  std::vector<Slot> slots_;
};

/// Fresh instance of function block `fb_name` (searched in the unit, its
/// libraries and the built-ins). Throws UnknownPou.
FbInstance instantiate(const TypedProgram& prog, std::string_view fb_name);

struct CycleResult {
  std::map<std::string, Value> outputs;
  ExecTrace trace;
};

/// One scan: writes `inputs`, runs the body once at `clock.now_ms`, then
/// advances the clock. Throws InputError or RuntimeFault.
CycleResult execute_cycle(FbInstance& inst, const std::map<std::string, Value>& inputs,
                          SimClock& clock);

/// One line per scan: `cycle=<n> t=<ms> events=[a;b;...]`.
struct MonitorRecord {
  std::uint64_t cycle = 0;
  std::int64_t time_ms = 0;
  std::vector<std::string> events;

  std::string format() const;
  static std::optional<MonitorRecord> parse(std::string_view line);
};

using MonitorSink = std::function<void(const MonitorRecord&)>;

struct FaultRecord {
  std::uint64_t cycle = 0;
  std::string instance;  // program variable whose call faulted
  std::string message;
  std::string pou;
  StatementId statement = kNoStatement;
  Span span;
};

struct RunOptions {
  std::uint64_t cycles = 1;
  /// Contain faults raised inside FB calls made directly by the program
  /// body: the instance is marked faulted and skipped in later scans.
  bool isolate_faults = false;
  /// Stops early once this returns true after a scan.
  std::function<bool(const FbInstance& program)> stop_when;
  /// Receives each scan's trace.
  std::function<void(const ExecTrace&)> on_trace;
  /// Also concatenate every scan's trace into ProgramRun::trace.
  bool keep_trace = false;
};

struct ProgramRun {
  std::unique_ptr<FbInstance> program;
  ExecTrace trace;
  std::uint64_t cycles_executed = 0;
  std::vector<FaultRecord> faults;
};

/// Runs PROGRAM `program_name` cyclically. After each scan the sink gets
/// one record whose events list the program-level elementary variables that
/// changed during the scan (`NAME=literal`) and isolated faults
/// (`FAULT=<instance>`). Throws UnknownPou, or RuntimeFault with the cycle.
ProgramRun run_program(const TypedProgram& prog, std::string_view program_name,
                       const RunOptions& options, SimClock& clock, const MonitorSink& monitor = {});

}  // namespace sttest
