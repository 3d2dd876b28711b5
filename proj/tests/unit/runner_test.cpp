#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "sttest/runner.hpp"

using namespace sttest;

namespace {

std::string hex_of(std::uint32_t v) {
  const char* digits = "0123456789ABCDEF";
  std::string s;
  do {
    s.insert(s.begin(), digits[v % 16]);
    v /= 16;
  } while (v);
  return s;
}

struct Loaded {
  SourceUnit src;
  std::shared_ptr<const TypedProgram> unit;
  CheckedSuite suite;
};

Loaded load(const SourceUnit& src, const std::string& csv, const std::string& fb = {},
            ValidationPolicy policy = ValidationPolicy::Strict) {
  Loaded l{src, compile(src), {}};
  l.suite = validate(parse_suite(csv, fb), *l.unit, policy);
  return l;
}

Loaded load_corpus(const std::string& block, const std::string& csv) {
  return load(SourceUnit::from_file(testkit::corpus_block_path(block)), csv, block);
}

std::string suite_file(const std::string& name) {
  return testkit::read_text(testkit::source_dir() + "/corpus/suites/" + name);
}

SuiteRun run(const Loaded& l, RunSettings s = {}) { return run_suite(l.src, {}, l.suite, s); }

std::string dec_to_hex_csv(const std::vector<std::int64_t>& inputs, int corrupt = -1) {
  std::string csv = "test_name,state,DE,expect_HEX\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::string hex = hex_of(static_cast<std::uint32_t>(inputs[i]));
    if (static_cast<int>(i) == corrupt) hex += "0";
    csv += "c" + std::to_string(i + 1) + ",1," + std::to_string(inputs[i]) + "," + hex + "\n";
  }
  return csv;
}

const std::vector<std::int64_t> kNonNegative = {0, 255, 4096, 32767, 32768, 65535};

}  // namespace

TEST(Compare, Examples) {
  ComparePolicy loose{1e-3, 0.0};
  EXPECT_TRUE(compare(Value::real(0.5671f), Value::lreal(0.56714329), loose).pass);
  EXPECT_FALSE(compare(Value::real(0.5671f), Value::lreal(0.56714329)).pass);
  const auto s = compare(Value::string("8000"), Value::string("8000"));
  EXPECT_TRUE(s.pass);
  EXPECT_EQ(s.detail, "expected '8000', actual '8000'");
  EXPECT_THROW(compare(Value::boolean(true), Value::int16(1)), TypeMismatch);
  EXPECT_THROW(compare(Value::dint(1), Value::real(1.0f)), TypeMismatch);
  EXPECT_TRUE(compare(Value::int16(-3), Value::dint(-3)).pass);
  EXPECT_FALSE(compare(Value::time(400), Value::time(450)).pass);
}

TEST(Compare, RelativeTolerance) {
  ComparePolicy rel{0.0, 1e-3};
  EXPECT_TRUE(compare(Value::lreal(1000.0), Value::lreal(1000.9), rel).pass);
  EXPECT_FALSE(compare(Value::lreal(1000.0), Value::lreal(1001.1), rel).pass);
}

TEST(Runner, CorrectSuiteFullyCoversAndPasses) {
  const auto l = load_corpus("DEC_TO_HEX", dec_to_hex_csv(kNonNegative));
  const auto r = run(l).report;
  EXPECT_EQ(r.cases_total, 6u);
  EXPECT_EQ(r.assertions_total, 6u);
  EXPECT_EQ(r.assertions_passed, 6u);
  EXPECT_EQ(r.assertion_success_text(), "100.00");
  EXPECT_EQ(r.statement_coverage_text(), "100.00");
  EXPECT_TRUE(r.all_passed());
  for (const auto& c : r.cases) EXPECT_EQ(c.verdict, Verdict::Pass) << c.name;
}

TEST(Runner, CorruptedExpectationFailsExactlyOnce) {
  const auto base = run(load_corpus("DEC_TO_HEX", dec_to_hex_csv(kNonNegative))).report;
  for (int k = 0; k < 6; ++k) {
    const auto r = run(load_corpus("DEC_TO_HEX", dec_to_hex_csv(kNonNegative, k))).report;
    EXPECT_EQ(r.assertions_passed + 1, base.assertions_passed);
    for (int i = 0; i < 6; ++i) {
      EXPECT_EQ(r.cases[i].verdict, i == k ? Verdict::Fail : Verdict::Pass);
    }
    ASSERT_EQ(r.cases[k].failures.size(), 1u);
    const auto& f = r.cases[k].failures[0];
    EXPECT_EQ(f.state, 1u);
    EXPECT_EQ(f.variable, "HEX");
    EXPECT_EQ(f.expected, "'" + hex_of(static_cast<std::uint32_t>(kNonNegative[k])) + "0'");
    EXPECT_EQ(f.actual, "'" + hex_of(static_cast<std::uint32_t>(kNonNegative[k])) + "'");
  }
}

TEST(Runner, NegativeInputBugIsRevealed) {
  const auto r = run(load_corpus("DEC_TO_HEX", suite_file("dec_to_hex_boundary.csv"))).report;
  EXPECT_EQ(r.statement_coverage_text(), "100.00");
  EXPECT_EQ(r.assertions_total, 6u);
  EXPECT_EQ(r.assertions_passed, 5u);
  EXPECT_EQ(r.assertion_success_text(), "83.33");
  const auto& neg = r.cases.back();
  EXPECT_EQ(neg.name, "negative_one");
  EXPECT_EQ(neg.verdict, Verdict::Fail);
  ASSERT_EQ(neg.failures.size(), 1u);
  EXPECT_EQ(neg.failures[0].expected, "'FFFFFFFF'");
  EXPECT_EQ(neg.failures[0].actual, "''");
  EXPECT_FALSE(r.all_passed());
}

TEST(Runner, FaultIsContainedToItsCase) {
  const SourceUnit src(
      "FUNCTION_BLOCK DIVIDER\nVAR_INPUT A : DINT; B : DINT; END_VAR\nVAR_OUTPUT Q : DINT; END_VAR\n"
      "Q := A / B;\nEND_FUNCTION_BLOCK\n",
      "divider.st");
  const auto l = load(src,
                      "test_name,state,A,B,expect_Q\nfirst,1,10,2,5\nby_zero,1,1,0,0\nby_zero,2,4,2,2\n"
                      "last,1,9,3,3\n");
  const auto r = run(l).report;
  ASSERT_EQ(r.cases.size(), 3u);
  EXPECT_EQ(r.cases[0].verdict, Verdict::Pass);
  EXPECT_EQ(r.cases[2].verdict, Verdict::Pass);
  const auto& f = r.cases[1];
  EXPECT_EQ(f.verdict, Verdict::Fault);
  ASSERT_TRUE(f.fault.has_value());
  EXPECT_EQ(f.fault->pou, "DIVIDER");
  EXPECT_EQ(f.fault->line, 4u);
  EXPECT_EQ(f.fault->cycle, 1u);
  EXPECT_EQ(f.passed, 0u);
  EXPECT_EQ(f.failures.size(), 2u);
  EXPECT_EQ(f.failures[0].actual, "(not checked)");
  EXPECT_EQ(r.assertions_passed, 2u);
  EXPECT_FALSE(r.all_passed());
}

TEST(Runner, TimerExpiresWithEnoughDwell) {
  RunSettings s;
  s.harness.cycle_time_ms = 50;
  const auto ok = run(load_corpus("ON_DELAY", suite_file("on_delay_expiry.csv")), s).report;
  EXPECT_EQ(ok.run.cycle_time_ms, 50);
  EXPECT_TRUE(ok.all_passed());
  const auto short_dwell = run(load_corpus("ON_DELAY", suite_file("on_delay_too_short.csv")), s).report;
  EXPECT_EQ(short_dwell.cases[0].verdict, Verdict::Fail);
  EXPECT_EQ(short_dwell.cases[0].failures[0].actual, "FALSE");
}

TEST(Runner, StopsWhenAllCasesAreDone) {
  const auto l = load_corpus("UPDOWN_COUNTER", suite_file("updown_counter.csv"));
  const auto r = run(l).report;
  EXPECT_TRUE(r.all_passed()) << render_report(r, ReportFormat::Text);
  // longest case: 11 states of one cycle each, then the final check scan
  EXPECT_EQ(r.run.cycles_executed, 12u);
  EXPECT_EQ(r.run.cycle_budget, 13u);
}

TEST(Runner, BudgetCapLeavesCasesUnfinished) {
  RunSettings s;
  s.max_scans = 3;
  const auto r = run(load_corpus("UPDOWN_COUNTER", suite_file("updown_counter.csv")), s).report;
  EXPECT_EQ(r.run.cycles_executed, 3u);
  const auto& up = r.cases[0];
  EXPECT_EQ(up.name, "count_up");
  EXPECT_FALSE(up.finished);
  EXPECT_EQ(up.verdict, Verdict::Fail);
  EXPECT_EQ(r.cases[1].verdict, Verdict::Pass);
}

TEST(Runner, RealOutputsUseTolerance) {
  const auto r = run(load_corpus("LAMBERT_W", suite_file("lambert_w.csv"))).report;
  EXPECT_TRUE(r.all_passed()) << render_report(r, ReportFormat::Text);
}

TEST(Runner, MetricsMatchSuite) {
  const auto l = load_corpus("UPDOWN_COUNTER", suite_file("updown_counter.csv"));
  std::uint64_t cells = 0;
  for (const auto& c : l.suite.cases)
    for (const auto& s : c.states) cells += s.expected.size();
  const auto out = run(l);
  EXPECT_EQ(out.report.cases_total, l.suite.cases.size());
  EXPECT_EQ(out.report.assertions_total, cells);
  const auto summary = summarize(out.coverage, *l.unit, "UPDOWN_COUNTER");
  EXPECT_EQ(out.report.statement_coverage_centi, summary.aggregate.centi_percent);
}

TEST(Runner, NoAssertionsGivesNotApplicable) {
  const auto l = load(SourceUnit::from_file(testkit::corpus_block_path("ACCUMULATOR")),
                      "test_name,state,X,RST\nonly_inputs,1,3,FALSE\n", "ACCUMULATOR", ValidationPolicy::Tolerant);
  ASSERT_FALSE(l.suite.cases.empty());
  const auto r = run(l).report;
  EXPECT_FALSE(r.assertion_success_centi.has_value());
  EXPECT_EQ(r.assertion_success_text(), "n/a");
  EXPECT_EQ(r.cases[0].verdict, Verdict::Pass);
  EXPECT_EQ(r.run.warnings.size(), 1u);
  EXPECT_NE(render_report(r, ReportFormat::Text).find("(n/a)"), std::string::npos);
  EXPECT_NE(render_report(r, ReportFormat::Json).find("\"assertion_success_pct\": \"n/a\""), std::string::npos);
}

TEST(Runner, TextReportHasOneRowPerCase) {
  const auto r = run(load_corpus("DEC_TO_HEX", dec_to_hex_csv({0, 1, 16, 255, 256}))).report;
  const auto text = render_report(r, ReportFormat::Text);
  for (int i = 1; i <= 5; ++i) {
    EXPECT_NE(text.find("  " + std::to_string(i) + "  c" + std::to_string(i) + "    pass"), std::string::npos) << text;
  }
  EXPECT_NE(text.find("cases: 5\nassertions: 5/5 passed (100.00%)\nstatement coverage: 100.00%"), std::string::npos);
}

TEST(Runner, JsonRoundTrips) {
  for (const auto& name : {"dec_to_hex_boundary.csv", "updown_counter.csv"}) {
    const std::string block = std::string(name).rfind("dec", 0) == 0 ? "DEC_TO_HEX" : "UPDOWN_COUNTER";
    const auto r = run(load_corpus(block, suite_file(name))).report;
    const auto json = render_report(r, ReportFormat::Json);
    EXPECT_EQ(json.find("{\n  \"schema\": 1,"), 0u);
    const auto back = parse_report_json(json);
    EXPECT_EQ(back, r);
    EXPECT_EQ(render_report(back, ReportFormat::Json), json);
  }
  EXPECT_THROW(parse_report_json("{}"), std::invalid_argument);
}

TEST(Runner, FixedClockIsReproducible) {
  RunSettings s;
  s.fixed_clock = true;
  const auto l = load_corpus("DEC_TO_HEX", suite_file("dec_to_hex_boundary.csv"));
  const auto a = run(l, s);
  const auto b = run(l, s);
  EXPECT_EQ(a.report.run.generated_at, "1970-01-01T00:00:00Z");
  EXPECT_EQ(render_report(a.report, ReportFormat::Json), render_report(b.report, ReportFormat::Json));
  EXPECT_EQ(a.lcov, b.lcov);
}

TEST(Runner, PhaseLabels) {
  const SourceUnit src(
      "FUNCTION_BLOCK TEST_CASE_1\nVAR_OUTPUT Q : BOOL; END_VAR\nQ := TRUE;\nEND_FUNCTION_BLOCK\n"
      "FUNCTION_BLOCK F\nVAR_INPUT A : BOOL; END_VAR\nVAR_OUTPUT Q : BOOL; END_VAR\nQ := A;\nEND_FUNCTION_BLOCK\n",
      "clash.st");
  const auto l = load(src, "test_name,state,A,expect_Q\nt,1,TRUE,TRUE\n", "F");
  try {
    run(l);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.phase(), PipelinePhase::Generate);
    EXPECT_EQ(std::string(e.what()).rfind("[generate]", 0), 0u);
  }
  RunSettings broken;
  broken.harness_template = "{UNIT_DECLS}\nPROGRAM TEST_MAIN\nVAR\n{TEST_INSTANCE_DECLS}END_VAR\n{TEST_CALLS}\n";
  try {
    run(load_corpus("DEC_TO_HEX", dec_to_hex_csv({1})), broken);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.phase(), PipelinePhase::Assemble);
  }
}

TEST(Runner, WritesArtifacts) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "sttest_runner_artifacts";
  fs::remove_all(dir);
  const std::string csv = suite_file("dec_to_hex_correct.csv");
  const auto out = run(load_corpus("DEC_TO_HEX", csv));
  write_artifacts(out, csv, dir);
  for (const char* f : {"report.json", "report.txt", "coverage.lcov", "coverage.annotated.txt", "harness.st", "suite.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(testkit::read_text((dir / "suite.csv").string()), csv);
  EXPECT_EQ(testkit::read_text((dir / "coverage.lcov").string()), out.lcov);
  EXPECT_NE(out.lcov.find("LH:"), std::string::npos);
}
