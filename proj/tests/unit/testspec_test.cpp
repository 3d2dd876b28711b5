#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sttest/testspec.hpp"

using namespace sttest;

namespace {

// independent base-16 rendering for expected values
std::string hex_of(std::uint32_t v) {
  const char* digits = "0123456789ABCDEF";
  std::string s;
  do {
    s.insert(s.begin(), digits[v % 16]);
    v /= 16;
  } while (v);
  return s;
}

template <typename F>
CsvError csv_error(F&& f) {
  try {
    f();
  } catch (const CsvError& e) {
    return e;
  }
  ADD_FAILURE() << "expected CsvError";
  return CsvError(0, 0, "");
}

template <typename F>
std::vector<ValidationIssue> issues_of(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST(Csv, QuotedFieldsAndLineEndings) {
  const auto rows = read_csv("a,\"b,c\",\"d\"\"e\"\r\n\r\n\"x\ny\",,z\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].fields, (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"x\ny", "", "z"}));
  EXPECT_EQ(rows[1].line, 3u);
  EXPECT_THROW(read_csv("a,\"b"), CsvError);
  EXPECT_THROW(read_csv("\"a\"b,c"), CsvError);
}

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field(" lead"), "\" lead\"");
  EXPECT_EQ(csv_field(""), "");
}

TEST(TestSpec, SingleStateDecToHex) {
  const std::string csv = "test_name,state,DE,expect_HEX\nc1,1,4096," + hex_of(4096) + "\n";
  const TestSuite s = parse_suite(csv, "DEC_TO_HEX");
  ASSERT_EQ(s.cases.size(), 1u);
  ASSERT_EQ(s.cases[0].states.size(), 1u);
  EXPECT_EQ(s.cases[0].states[0].inputs.at("DE"), "4096");
  EXPECT_EQ(s.cases[0].states[0].expected.at("HEX"), "1000");
  auto prog = testkit::compile_corpus("DEC_TO_HEX");
  const CheckedSuite c = validate(s, *prog);
  EXPECT_EQ(c.cases[0].states[0].inputs.at("DE"), Value::dint(4096));
  EXPECT_EQ(c.cases[0].states[0].expected.at("HEX"), Value::string("1000"));
}

TEST(TestSpec, StatesOrderedByIndexAndIntermediateStatesMayBeUnchecked) {
  const TestSuite s = parse_suite(
      "test_name,state,X,RST,expect_SUM\n"
      "load,3,5,,12\n"
      "load,1,3,TRUE,\n"
      "load,2,4,FALSE,\n");
  ASSERT_EQ(s.cases[0].states.size(), 3u);
  EXPECT_EQ(s.cases[0].states[0].inputs.at("X"), "3");
  EXPECT_TRUE(s.cases[0].states[0].expected.empty());
  EXPECT_EQ(s.cases[0].states[2].expected.at("SUM"), "12");
  EXPECT_FALSE(s.cases[0].states[2].inputs.count("RST"));
  auto prog = testkit::compile_corpus("ACCUMULATOR");
  EXPECT_NO_THROW(validate(s, *prog));
}

TEST(TestSpec, CsvErrorsCarryPosition) {
  EXPECT_EQ(csv_error([] { parse_suite("test_name,state,A\nc,1,2\nc,2\n"); }).row(), 3u);
  EXPECT_EQ(csv_error([] { parse_suite(""); }).row(), 1u);
  EXPECT_EQ(csv_error([] { parse_suite("A,B\n1,2\n"); }).row(), 1u);
  const auto dup = csv_error([] { parse_suite("test_name,state,A\nc,1,2\nd,1,2\nc,1,3\n"); });
  EXPECT_EQ(dup.row(), 4u);
  const auto nonnum = csv_error([] { parse_suite("test_name,state,A\nc,one,2\n"); });
  EXPECT_EQ(nonnum.row(), 2u);
  EXPECT_EQ(nonnum.column(), 2u);
  EXPECT_EQ(csv_error([] { parse_suite("test_name,state,dwell_cycles\nc,1,0\n"); }).column(), 3u);
}

TEST(TestSpec, HeaderIsCaseInsensitive) {
  const TestSuite s = parse_suite("Test_Name,STATE,Dwell_Cycles,de,Expect_Hex\nc,1,,1,1\n");
  EXPECT_EQ(s.input_columns, (std::vector<std::string>{"DE"}));
  EXPECT_EQ(s.output_columns, (std::vector<std::string>{"HEX"}));
  EXPECT_TRUE(s.dwell_column);
  EXPECT_EQ(s.cases[0].states[0].dwell_cycles, 1u);
}

TEST(TestSpec, UnknownColumn) {
  auto prog = testkit::compile_corpus("DEC_TO_HEX");
  const TestSuite s = parse_suite("test_name,state,DEZ,expect_HEX\nc,1,1,1\n");
  const auto issues = issues_of([&] { validate(s, *prog); });
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].column, "DEZ");
  EXPECT_NE(issues[0].message.find("unknown column"), std::string::npos);

  const CheckedSuite t = validate(s, *prog, ValidationPolicy::Tolerant);
  EXPECT_EQ(t.dropped_columns, (std::vector<std::string>{"DEZ"}));
  EXPECT_EQ(t.warnings.size(), 1u);
  EXPECT_TRUE(t.cases[0].states[0].inputs.empty());
}

TEST(TestSpec, OutputUsedAsInputIsUnknown) {
  auto prog = testkit::compile_corpus("DEC_TO_HEX");
  const auto issues = issues_of([&] { validate(parse_suite("test_name,state,HEX,expect_DE\nc,1,1,1\n"), *prog); });
  // both columns, and nothing left to check
  ASSERT_EQ(issues.size(), 3u);
  EXPECT_EQ(issues[0].column, "HEX");
  EXPECT_EQ(issues[1].column, "expect_DE");
}

TEST(TestSpec, TypedLiterals) {
  auto prog = testkit::compile_corpus("ON_DELAY");
  const CheckedSuite c = validate(parse_suite(
                                      "test_name,state,IN,PT,expect_Q,expect_ET\n"
                                      "a,1,TRUE,T#1s500ms,FALSE,0\n"
                                      "a,2,1,250,true,T#250ms\n"),
                                  *prog);
  EXPECT_EQ(c.cases[0].states[0].inputs.at("IN"), Value::boolean(true));
  EXPECT_EQ(c.cases[0].states[0].inputs.at("PT"), Value::time(1500));
  EXPECT_EQ(c.cases[0].states[1].inputs.at("PT"), Value::time(250));
  EXPECT_EQ(c.cases[0].states[1].expected.at("ET"), Value::time(250));
  EXPECT_EQ(c.cases[0].states[1].expected.at("Q"), Value::boolean(true));
}

TEST(TestSpec, UnparseableLiteral) {
  auto prog = testkit::compile_corpus("ON_DELAY");
  const auto issues = issues_of([&] {
    validate(parse_suite("test_name,state,IN,PT,expect_Q\na,1,maybe,T#zz,TRUE\n"), *prog, ValidationPolicy::Tolerant);
  });
  ASSERT_EQ(issues.size(), 2u);
  EXPECT_EQ(issues[0].column, "IN");
  EXPECT_EQ(issues[0].state, 1u);
  EXPECT_EQ(issues[1].column, "PT");
}

TEST(TestSpec, OmittedInputsKeepDefaults) {
  auto prog = testkit::compile_corpus("ON_DELAY");
  const CheckedSuite c = validate(parse_suite("test_name,state,expect_Q\na,1,FALSE\n"), *prog);
  EXPECT_TRUE(c.cases[0].states[0].inputs.empty());
}

TEST(TestSpec, CaseWithoutAssertions) {
  auto prog = testkit::compile_corpus("ACCUMULATOR");
  const TestSuite s = parse_suite("test_name,state,X,expect_SUM\nok,1,1,1\nempty,1,2,\n");
  const auto issues = issues_of([&] { validate(s, *prog); });
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].test_case, "empty");
  const CheckedSuite t = validate(s, *prog, ValidationPolicy::Tolerant);
  EXPECT_FALSE(t.cases[1].has_assertions());
  EXPECT_EQ(t.warnings.size(), 1u);
}

TEST(TestSpec, DefaultFbIsLastDeclared) {
  auto prog = testkit::compile_text(
      "FUNCTION_BLOCK A VAR_OUTPUT Q : BOOL; END_VAR END_FUNCTION_BLOCK\n"
      "FUNCTION_BLOCK B VAR_OUTPUT Q : BOOL; END_VAR END_FUNCTION_BLOCK\n"
      "FUNCTION F : INT F := 1; END_FUNCTION");
  EXPECT_EQ(default_fb_under_test(*prog), "B");
  EXPECT_EQ(validate(parse_suite("test_name,state,expect_Q\na,1,TRUE\n"), *prog).fb_under_test, "B");
  EXPECT_THROW(validate(parse_suite("test_name,state,expect_Q\na,1,TRUE\n", "F"), *prog), UnknownPou);
}

TEST(TestSpec, SerializeQuotesAndKeepsEmptyCells) {
  TestSuite s;
  s.input_columns = {"S"};
  s.output_columns = {"Y", "Z"};
  s.cases.push_back({"a,b", {TestState{{{"S", "x,y"}}, {{"Z", "1"}}, 1}}});
  EXPECT_EQ(serialize_suite(s), "test_name,state,S,expect_Y,expect_Z\n\"a,b\",1,\"x,y\",,1\n");
  EXPECT_EQ(parse_suite(serialize_suite(s)), s);
}

TEST(TestSpec, RoundTripRandomSuites) {
  std::mt19937 rng(1234);
  for (int i = 0; i < 300; ++i) {
    const TestSuite s = testkit::random_raw_suite(rng);
    ASSERT_EQ(parse_suite(serialize_suite(s)), s) << serialize_suite(s);
  }
}

TEST(TestSpec, ValidationIsTotal) {
  std::mt19937 rng(99);
  for (const auto& name : testkit::corpus_block_names()) {
    auto prog = testkit::compile_corpus(name);
    const PouInfo& fb = *prog->find_pou(name);
    for (int i = 0; i < 40; ++i) {
      TestSuite s = testkit::random_suite(fb, rng);
      // corrupt some suites
      if (rng() % 3 == 0 && !s.cases[0].states[0].inputs.empty()) s.cases[0].states[0].inputs.begin()->second = "#?";
      if (rng() % 4 == 0) s.output_columns.push_back("NOPE");
      for (auto policy : {ValidationPolicy::Strict, ValidationPolicy::Tolerant}) {
        bool returned = false, threw = false;
        try {
          validate(s, *prog, policy);
          returned = true;
        } catch (const ValidationError& e) {
          threw = true;
          EXPECT_FALSE(e.issues().empty());
        }
        EXPECT_NE(returned, threw);
      }
    }
  }
}

TEST(TestSpec, GeneratedSuitesValidate) {
  std::mt19937 rng(7);
  for (const auto& name : testkit::corpus_block_names()) {
    auto prog = testkit::compile_corpus(name);
    const PouInfo& fb = *prog->find_pou(name);
    for (int i = 0; i < 20; ++i) {
      const TestSuite s = testkit::random_suite(fb, rng);
      EXPECT_NO_THROW(validate(s, *prog)) << name << "\n" << serialize_suite(s);
      EXPECT_EQ(parse_suite(serialize_suite(s), s.fb_under_test), s);
    }
  }
}

TEST(TestSpec, BundledSuitesRoundTrip) {
  namespace fs = std::filesystem;
  int seen = 0;
  for (const auto& e : fs::directory_iterator(testkit::source_dir() + "/corpus/suites")) {
    if (e.path().extension() != ".csv") continue;
    const TestSuite s = parse_suite(testkit::read_text(e.path().string()));
    EXPECT_EQ(parse_suite(serialize_suite(s)), s) << e.path();
    ++seen;
  }
  EXPECT_GT(seen, 0);
}
