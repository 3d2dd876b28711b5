#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sttest/csv.hpp"
#include "sttest/program.hpp"
#include "sttest/value.hpp"

namespace sttest {

/// Literals are kept as CSV text until validate(). A missing key is an
/// empty cell: hold the previous input, or skip the check.
struct TestState {
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> expected;  // keyed by output name, no prefix
  std::uint32_t dwell_cycles = 1;

  friend bool operator==(const TestState&, const TestState&) = default;
};

struct TestCase {
  std::string name;
  std::vector<TestState> states;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct TestSuite {
  std::string fb_under_test;
  std::vector<std::string> input_columns;   // header order
  std::vector<std::string> output_columns;  // header order, no prefix
  bool dwell_column = false;
  std::vector<TestCase> cases;

  friend bool operator==(const TestSuite&, const TestSuite&) = default;
};

inline constexpr std::string_view kExpectPrefix = "expect_";

/// Header: `test_name,state[,dwell_cycles],<inputs...>,expect_<outputs...>`.
/// Rows of one case are ordered by state index. Throws CsvError.
TestSuite parse_suite(std::string_view csv_text, std::string fb_under_test = {});

/// Inverse of parse_suite; states are renumbered 1..n.
std::string serialize_suite(const TestSuite& suite);

struct CheckedState {
  std::map<std::string, Value> inputs;    // only the cells that were set
  std::map<std::string, Value> expected;  // only the cells to check
  std::uint32_t dwell_cycles = 1;
};

struct CheckedCase {
  std::string name;
  std::vector<CheckedState> states;
  bool has_assertions() const;
};

struct CheckedSuite {
  std::string fb_under_test;
  const PouInfo* fb = nullptr;
  std::vector<CheckedCase> cases;
  std::vector<std::string> input_columns;
  std::vector<std::string> output_columns;
  std::vector<std::string> warnings;  // tolerated problems, tolerant policy only
  std::vector<std::string> dropped_columns;
};

struct ValidationIssue {
  std::string column;  // empty when the issue is not tied to a column
  std::string test_case;
  std::size_t state = 0;  // 1-based, 0 when not tied to a state
  std::string message;

  std::string describe() const;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

enum class ValidationPolicy {
  Strict,    // every problem is an error
  Tolerant,  // unknown columns are dropped and cases without checks kept, both with a warning
};

/// Types every literal against the FB's declared interface. Omitted input
/// columns keep their declared initial values. Throws ValidationError
/// (never empty) or UnknownPou for a missing FB.
CheckedSuite validate(const TestSuite& suite, const TypedProgram& prog,
                      ValidationPolicy policy = ValidationPolicy::Strict);

/// Name of the FB a suite targets when none is given: the last function
/// block declared in the unit.
std::optional<std::string> default_fb_under_test(const TypedProgram& prog);

}  // namespace sttest
