#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sttest/harness.hpp"
#include "sttest/runtime.hpp"

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

struct Built {
  std::shared_ptr<const TypedProgram> unit;
  HarnessBundle bundle;
  AssembledProgram assembled;
};

Built build(const std::string& block, const std::string& csv, HarnessOptions opt = {}) {
  Built b;
  const SourceUnit src = SourceUnit::from_file(testkit::corpus_block_path(block));
  b.unit = compile(src);
  const CheckedSuite suite = validate(parse_suite(csv, block), *b.unit);
  b.bundle = generate_harness(suite, *b.unit, opt);
  b.assembled = assemble_program(b.bundle, default_harness_template(), src, {});
  return b;
}

// Hook values after each scan, per case instance
struct Scan {
  bool done;
  bool pass;
  std::int64_t fails;
};

std::vector<std::vector<Scan>> run(const Built& b, std::uint64_t scans, std::unique_ptr<FbInstance>* keep = nullptr) {
  const TypedProgram& prog = *b.assembled.program;
  std::vector<std::vector<Scan>> out(b.bundle.cases.size());
  // one fresh run per prefix length gives the per-scan view
  for (std::uint64_t n = 1; n <= scans; ++n) {
    SimClock c{0, prog.tasks().at(0).interval_ms};
    RunOptions o;
    o.cycles = n;
    ProgramRun pr = run_program(prog, "TEST_MAIN", o, c);
    for (std::size_t i = 0; i < b.bundle.cases.size(); ++i) {
      const auto& h = b.bundle.cases[i];
      out[i].push_back({pr.program->get(h.done_hook).as_bool(), pr.program->get(h.pass_hook).as_bool(),
                        pr.program->get(h.fails_hook).as_int()});
    }
    if (keep && n == scans) *keep = std::move(pr.program);
  }
  return out;
}

}  // namespace

TEST(Harness, SingleStateCallsThenChecksNextScan) {
  const Built b = build("DEC_TO_HEX", "test_name,state,DE,expect_HEX\nff,1,255," + hex_of(255) + "\n");
  ASSERT_EQ(b.bundle.cases.size(), 1u);
  EXPECT_EQ(b.bundle.cases[0].scans, 2u);
  const auto scans = run(b, 3);
  EXPECT_FALSE(scans[0][0].done);
  EXPECT_TRUE(scans[0][1].done);
  EXPECT_TRUE(scans[0][1].pass);
  EXPECT_EQ(scans[0][1].fails, 0);
  EXPECT_TRUE(scans[0][2].done);
}

TEST(Harness, FailingCheckRecordsActual) {
  std::unique_ptr<FbInstance> program;
  const Built b = build("DEC_TO_HEX", "test_name,state,DE,expect_HEX\nneg,1,-1,FFFFFFFF\n");
  const auto scans = run(b, 2, &program);
  EXPECT_TRUE(scans[0][1].done);
  EXPECT_FALSE(scans[0][1].pass);
  EXPECT_EQ(scans[0][1].fails, 1);
  const FbInstance& tc = program->child("TC_1");
  EXPECT_EQ(tc.array("RESULT")[0], Value::int16(2));
  EXPECT_EQ(tc.get("ACT_1"), Value::string(""));
}

TEST(Harness, MultiStateAdvancesOncePerScan) {
  // SUM after each state: 3, 7, 0 (reset)
  const Built b = build("ACCUMULATOR",
                        "test_name,state,X,RST,expect_SUM,expect_COUNT\n"
                        "seq,1,3,FALSE,3,\n"
                        "seq,2,4,,7,2\n"
                        "seq,3,,TRUE,,\n"
                        "seq,4,5,FALSE,5,1\n");
  const auto& h = b.bundle.cases[0];
  EXPECT_EQ(h.checks.size(), 5u);
  EXPECT_EQ(h.scans, 5u);
  const auto scans = run(b, 5);
  for (int i = 0; i < 4; ++i) EXPECT_FALSE(scans[0][i].done) << i;
  EXPECT_TRUE(scans[0][4].done);
  EXPECT_TRUE(scans[0][4].pass);
}

TEST(Harness, AssertionTimingSeesStateOutputsOneScanLater) {
  // a wrong expectation in state 1 only fails if compared against state 1's scan
  const Built b = build("ACCUMULATOR",
                        "test_name,state,X,expect_SUM\n"
                        "timing,1,3,3\n"
                        "timing,2,4,7\n");
  const auto scans = run(b, 3);
  EXPECT_TRUE(scans[0][2].pass);
  const Built off = build("ACCUMULATOR",
                          "test_name,state,X,expect_SUM\n"
                          "timing,1,3,7\n"
                          "timing,2,4,3\n");
  const auto bad = run(off, 3);
  EXPECT_EQ(bad[0][2].fails, 2);
}

TEST(Harness, DwellLetsTimersExpire) {
  // reference: TON at 50 ms cycles, PT 400 ms; the k-th call sees now=(k-1)*50
  auto ton_q = [](int calls) { return (calls - 1) * 50 >= 400; };
  HarnessOptions opt;
  opt.cycle_time_ms = 50;
  const std::string q10 = ton_q(10) ? "TRUE" : "FALSE";
  const std::string q7 = ton_q(7) ? "TRUE" : "FALSE";
  const Built b = build("ON_DELAY",
                        "test_name,state,dwell_cycles,IN,PT,expect_Q\n"
                        "ten,1,10,TRUE,T#400ms," + q10 + "\n"
                        "seven,1,7,TRUE,T#400ms," + q7 + "\n",
                        opt);
  EXPECT_EQ(b.assembled.program->tasks().at(0).interval_ms, 50);
  EXPECT_EQ(b.bundle.cases[0].scans, 11u);
  const auto scans = run(b, 11);
  EXPECT_TRUE(scans[0][10].done);
  EXPECT_TRUE(scans[0][10].pass);
  EXPECT_FALSE(scans[0][9].done);
  EXPECT_TRUE(scans[1][7].done);
  EXPECT_TRUE(scans[1][7].pass);
  EXPECT_EQ(q10, "TRUE");
  EXPECT_EQ(q7, "FALSE");
}

TEST(Harness, RealComparisonUsesTolerance) {
  // W(1) = 0.5671432904097838 (omega constant); REAL output carries ~1e-7 error
  HarnessOptions opt;
  const Built near = build("LAMBERT_W", "test_name,state,X,expect_W,expect_VALID\nw1,1,1.0,0.56714329,TRUE\n", opt);
  EXPECT_TRUE(run(near, 2)[0][1].pass);
  const Built far = build("LAMBERT_W", "test_name,state,X,expect_W\nw1,1,1.0,0.5672\n", opt);
  EXPECT_FALSE(run(far, 2)[0][1].pass);
  opt.atol = 1e-3;
  const Built loose = build("LAMBERT_W", "test_name,state,X,expect_W\nw1,1,1.0,0.5672\n", opt);
  EXPECT_TRUE(run(loose, 2)[0][1].pass);
}

TEST(Harness, CasesAreInstantiatedAndCalledInOrder) {
  std::string csv = "test_name,state,X,expect_SUM\n";
  for (int i = 1; i <= 5; ++i) csv += "c" + std::to_string(i) + ",1," + std::to_string(i) + "," + std::to_string(i) + "\n";
  const Built b = build("ACCUMULATOR", csv);
  ASSERT_EQ(b.bundle.cases.size(), 5u);
  std::size_t last = 0;
  for (int i = 1; i <= 5; ++i) {
    const auto pos = b.bundle.test_calls.find("TC_" + std::to_string(i) + "();");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_GT(pos + 1, last);
    last = pos + 1;
    EXPECT_EQ(b.bundle.fb_names.at("c" + std::to_string(i)), "TEST_CASE_" + std::to_string(i));
  }
  const auto scans = run(b, 2);
  for (const auto& s : scans) EXPECT_TRUE(s[1].pass);
}

TEST(Harness, ReorderingCasesKeepsVerdicts) {
  const std::vector<std::string> rows = {"a,1,3,FALSE,3\n", "b,1,4,TRUE,4\n", "c,1,5,FALSE,6\n", "d,1,1,FALSE,1\n"};
  auto verdicts = [&](std::vector<std::string> order) {
    std::string csv = "test_name,state,X,RST,expect_SUM\n";
    for (const auto& r : order) csv += r;
    const Built b = build("ACCUMULATOR", csv);
    const auto scans = run(b, 2);
    std::map<std::string, bool> out;
    for (std::size_t i = 0; i < scans.size(); ++i) out[b.bundle.cases[i].case_name] = scans[i][1].pass;
    return out;
  };
  const auto base = verdicts(rows);
  EXPECT_FALSE(base.at("c"));
  EXPECT_FALSE(base.at("b"));  // RST returns before summing
  auto shuffled = rows;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(verdicts(shuffled), base);
}

TEST(Harness, GeneratedCodeAlwaysResolves) {
  std::mt19937 rng(17);
  for (const auto& name : testkit::corpus_block_names()) {
    const SourceUnit src = SourceUnit::from_file(testkit::corpus_block_path(name));
    auto unit = compile(src);
    for (int i = 0; i < 15; ++i) {
      const TestSuite s = testkit::random_suite(*unit->find_pou(name), rng);
      const CheckedSuite c = validate(s, *unit);
      const HarnessBundle b = generate_harness(c, *unit);
      EXPECT_NO_THROW(assemble_program(b, default_harness_template(), src, {})) << name;
    }
  }
}

TEST(Harness, LibrariesPrecedeTheUnit) {
  const SourceUnit lib("FUNCTION_BLOCK HELPER VAR_INPUT A : INT; END_VAR VAR_OUTPUT B : INT; END_VAR B := A * 2; END_FUNCTION_BLOCK\n",
                       "lib.st");
  const SourceUnit unit_src(
      "FUNCTION_BLOCK USER VAR_INPUT A : INT; END_VAR VAR_OUTPUT B : INT; END_VAR VAR H : HELPER; END_VAR\n"
      "H(A := A); B := H.B;\nEND_FUNCTION_BLOCK\n",
      "user.st");
  auto libp = compile(lib);
  std::vector<std::shared_ptr<const TypedProgram>> libs{libp};
  auto unit = compile(unit_src, libs);
  const CheckedSuite c = validate(parse_suite("test_name,state,A,expect_B\nx,1,21,42\n", "USER"), *unit);
  const AssembledProgram a = assemble_program(generate_harness(c, *unit), default_harness_template(), unit_src, {lib});
  const std::string& text = a.source.text();
  EXPECT_LT(text.find("FUNCTION_BLOCK HELPER"), text.find("FUNCTION_BLOCK USER"));
  EXPECT_LT(text.find("FUNCTION_BLOCK USER"), text.find("FUNCTION_BLOCK TEST_CASE_1"));
  ASSERT_NE(a.segment_at(1), nullptr);
  EXPECT_EQ(a.segment_at(1)->part, "library:lib.st");
  EXPECT_EQ(a.segment_at(2)->part, "unit");
}

TEST(Harness, CollisionsAreRejected) {
  auto unit = testkit::compile_text(
      "FUNCTION_BLOCK TEST_CASE_1 VAR_OUTPUT Q : BOOL; END_VAR END_FUNCTION_BLOCK\n"
      "FUNCTION_BLOCK F VAR_OUTPUT Q : BOOL; END_VAR Q := TRUE; END_FUNCTION_BLOCK");
  const CheckedSuite c = validate(parse_suite("test_name,state,expect_Q\nx,1,TRUE\n", "F"), *unit);
  EXPECT_THROW(generate_harness(c, *unit), CollisionError);
}

TEST(Harness, BrokenPartIsNamed) {
  const SourceUnit unit_src = SourceUnit::from_file(testkit::corpus_block_path("ACCUMULATOR"));
  auto unit = compile(unit_src);
  const CheckedSuite c = validate(parse_suite("test_name,state,X,expect_SUM\nx,1,1,1\n"), *unit);
  const HarnessBundle b = generate_harness(c, *unit);
  try {
    assemble_program(b, "{UNIT_DECLS}\nPROGRAM TEST_MAIN VAR {TEST_INSTANCE_DECLS} END_VAR {TEST_CALLS} END_PROGRA",
                     unit_src, {});
    FAIL();
  } catch (const AssemblyError& e) {
    EXPECT_EQ(e.part(), "template");
  }
  try {
    assemble_program(b, default_harness_template(), SourceUnit("FUNCTION_BLOCK X", "u.st"), {});
    FAIL();
  } catch (const AssemblyError& e) {
    EXPECT_EQ(e.part(), "unit");
  }
}
