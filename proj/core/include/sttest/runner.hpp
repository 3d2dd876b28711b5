#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sttest/coverage.hpp"
#include "sttest/harness.hpp"
#include "sttest/testspec.hpp"

namespace sttest {

class TypeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ComparePolicy {
  double atol = 1e-6;
  double rtol = 1e-6;
};

struct Comparison {
  bool pass = false;
  std::string detail;  // "expected <e>, actual <a>"
};

/// Exact for BOOL, integers, TIME and strings; REAL/LREAL pass when
/// |actual - expected| <= atol + rtol * |expected|. Integer kinds of any
/// width compare with each other, as do REAL and LREAL. Throws TypeMismatch.
Comparison compare(const Value& expected, const Value& actual, const ComparePolicy& policy = {});

enum class Verdict { Pass, Fail, Fault };
std::string_view verdict_name(Verdict v);

struct FailedAssertion {
  std::size_t state = 0;
  std::string variable;
  std::string expected;
  std::string actual;  // "(not checked)" when the check never ran

  friend bool operator==(const FailedAssertion&, const FailedAssertion&) = default;
};

struct CaseFault {
  std::string message;
  std::uint64_t cycle = 0;
  std::string pou;
  std::uint32_t line = 0;

  friend bool operator==(const CaseFault&, const CaseFault&) = default;
};

struct CaseReport {
  std::string name;
  Verdict verdict = Verdict::Pass;
  std::uint64_t assertions = 0;
  std::uint64_t passed = 0;
  bool finished = true;  // DONE was raised
  std::vector<FailedAssertion> failures;
  std::optional<CaseFault> fault;

  friend bool operator==(const CaseReport&, const CaseReport&) = default;
};

struct RunMetadata {
  std::string unit;
  std::string fb_under_test;
  std::string mode = "none";
  std::string provider = "none";
  std::int64_t cycle_time_ms = 10;
  std::uint64_t cycles_executed = 0;
  std::uint64_t cycle_budget = 0;
  double atol = 1e-6;
  double rtol = 1e-6;
  std::string generated_at;
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_columns;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct CoverageLine {
  std::string pou;
  std::uint64_t total = 0;
  std::uint64_t hit = 0;
  std::int64_t centi_percent = 0;

  friend bool operator==(const CoverageLine&, const CoverageLine&) = default;
};

struct TestReport {
  RunMetadata run;
  std::vector<CaseReport> cases;
  std::uint64_t cases_total = 0;
  std::uint64_t assertions_total = 0;
  std::uint64_t assertions_passed = 0;
  /// Hundredths of a percent; empty when there are no assertions.
  std::optional<std::int64_t> assertion_success_centi;
  std::int64_t statement_coverage_centi = 0;
  std::vector<CoverageLine> coverage_pous;
  CoverageLine coverage_aggregate;
  std::map<std::string, std::string> artifacts;  // kind -> file name

  /// "83.33" or "n/a".
  std::string assertion_success_text() const;
  std::string statement_coverage_text() const;
  bool all_passed() const;

  friend bool operator==(const TestReport&, const TestReport&) = default;
};

enum class ReportFormat { Text, Json };
std::string render_report(const TestReport& report, ReportFormat format);
/// Inverse of the JSON rendering. Throws std::invalid_argument.
TestReport parse_report_json(std::string_view json);

enum class PipelinePhase { Generate, Assemble, Execute, Report };
std::string_view phase_label(PipelinePhase p);

class PipelineError : public std::runtime_error {
 public:
  PipelineError(PipelinePhase phase, const std::string& message, std::string hint = {});
  PipelinePhase phase() const { return phase_; }
  const std::string& hint() const { return hint_; }

 private:
  PipelinePhase phase_;
  std::string hint_;
};

struct RunSettings {
  HarnessOptions harness;
  std::uint64_t max_scans = 100000;
  std::string mode = "none";
  std::string provider = "none";
  /// Report timestamps become 1970-01-01T00:00:00Z.
  bool fixed_clock = false;
  /// Empty selects default_harness_template().
  std::string harness_template;
};

struct SuiteRun {
  TestReport report;
  std::string harness_source;
  CoverageMap coverage;  // unit ids
  std::string lcov;
  std::string annotated;
};

/// Generates, assembles and runs the harness for `suite`, then fills the
/// report. The suite may have been validated against any compilation of
/// the same unit. Throws PipelineError.
SuiteRun run_suite(const SourceUnit& unit_src, const std::vector<SourceUnit>& library_srcs,
                   const CheckedSuite& suite, const RunSettings& settings = {});

/// report.json, report.txt, coverage.lcov, coverage.annotated.txt,
/// harness.st and suite.csv under `dir`.
void write_artifacts(const SuiteRun& run, std::string_view suite_csv, const std::filesystem::path& dir);

}  // namespace sttest
