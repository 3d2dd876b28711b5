#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sttest/diagnostic.hpp"
#include "sttest/program.hpp"
#include "sttest/source.hpp"
#include "sttest/testspec.hpp"

namespace sttest {

struct HarnessOptions {
  double atol = 1e-6;
  double rtol = 1e-6;
  std::int64_t cycle_time_ms = 10;
};

/// Editable PROGRAM/CONFIGURATION skeleton with {UNIT_DECLS},
/// {TEST_INSTANCE_DECLS}, {TEST_CALLS} and {CYCLE_TIME_MS}.
std::string_view default_harness_template();

class CollisionError : public std::runtime_error {
 public:
  explicit CollisionError(const std::string& name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// One generated comparison. `index` is the RESULT slot in the case FB.
struct CheckSite {
  std::uint32_t index = 0;
  std::size_t state = 0;  // 1-based
  std::string output;
  Value expected;
  std::string actual_var;  // ACT_<index>
};

struct CaseHarness {
  std::string case_name;
  std::string fb_name;   // TEST_CASE_<n>
  std::string instance;  // TC_<n>
  std::string done_hook, pass_hook, fails_hook;
  std::vector<CheckSite> checks;
  /// Scans until DONE: one per dwell cycle plus the final check scan.
  std::uint64_t scans = 0;
};

struct HarnessBundle {
  std::string fb_under_test;
  std::string test_fbs;        // generated FUNCTION_BLOCKs
  std::string instance_decls;  // program VAR lines
  std::string test_calls;      // program body
  std::vector<CaseHarness> cases;
  std::map<std::string, std::string> fb_names;  // case name -> FB name
  HarnessOptions options;
};

/// Test FB for one case: applies each state's inputs for dwell_cycles
/// scans, checks the expected outputs one scan after the state's last
/// call, then raises DONE with PASS and FAILS.
std::string generate_case_fb(const CheckedCase& test_case, const PouInfo& fb, std::size_t index,
                             const HarnessOptions& options, CaseHarness* info = nullptr);

/// All case FBs plus the program parts. Throws CollisionError when a
/// generated name clashes with a POU of `unit` or its libraries.
HarnessBundle generate_harness(const CheckedSuite& suite, const TypedProgram& unit,
                               const HarnessOptions& options = {});

struct Segment {
  std::string part;  // "library:<origin>", "unit", "tests", "template"
  std::size_t first_line = 0;  // 1-based, in the assembled text
  std::size_t line_count = 0;
};

struct AssembledProgram {
  SourceUnit source;
  std::shared_ptr<const TypedProgram> program;  // resolved
  std::vector<Segment> segments;
  const Segment* segment_at(std::size_t line) const;
};

/// A part that failed to compile, with its diagnostics.
class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(std::string part, const CompileError& cause);
  const std::string& part() const { return part_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::string part_;
  std::vector<Diagnostic> diagnostics_;
};

/// Libraries, the unit, the test FBs and the program, in that order, in one
/// resolved source. Every part is parsed on its own first so errors name
/// their origin. Throws AssemblyError.
AssembledProgram assemble_program(const HarnessBundle& bundle, std::string_view harness_template,
                                  const SourceUnit& unit_src, const std::vector<SourceUnit>& library_srcs,
                                  const std::string& origin = "harness.st");

}  // namespace sttest
