#include "generators.hpp"

#include <cstdio>

namespace sttest::testkit {

namespace {

int pick(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string random_text(std::mt19937& rng, std::size_t max_len, const std::string& alphabet) {
  std::string s;
  const auto n = static_cast<std::size_t>(pick(rng, 1, static_cast<int>(max_len)));
  for (std::size_t i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(alphabet.size()) - 1))];
  return s;
}

}  // namespace

std::string random_literal(const Type& type, std::mt19937& rng) {
  switch (type.kind) {
    case TypeKind::Bool: return pick(rng, 0, 1) ? "TRUE" : "FALSE";
    case TypeKind::Byte: return std::to_string(pick(rng, 0, 255));
    case TypeKind::Word: return std::to_string(pick(rng, 0, 65535));
    case TypeKind::Int: return std::to_string(pick(rng, -32768, 32767));
    case TypeKind::DInt: return std::to_string(std::uniform_int_distribution<std::int32_t>()(rng));
    case TypeKind::Real:
    case TypeKind::LReal: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", std::uniform_real_distribution<double>(-1e4, 1e4)(rng));
      return buf;
    }
    case TypeKind::Time:
      if (pick(rng, 0, 1)) return "T#" + std::to_string(pick(rng, 0, 5000)) + "ms";
      return std::to_string(pick(rng, 0, 5000));
    case TypeKind::String:
      return random_text(rng, std::min<std::size_t>(type.length, 12), "ABCxyz019 ,\"");
    default: return "0";
  }
}

TestSuite random_suite(const PouInfo& fb, std::mt19937& rng, int max_cases, int max_states) {
  TestSuite suite;
  suite.fb_under_test = fb.name;
  std::vector<InterfaceVar> ins, outs;
  for (const auto& v : interface_of(fb)) {
    if (!is_elementary(v.type.kind)) continue;
    if (v.section == Section::Input && pick(rng, 0, 3)) ins.push_back(v);
    if (v.section == Section::Output) outs.push_back(v);
  }
  for (const auto& v : ins) suite.input_columns.push_back(v.name);
  for (const auto& v : outs) suite.output_columns.push_back(v.name);
  suite.dwell_column = pick(rng, 0, 1);
  const int cases = pick(rng, 1, max_cases);
  for (int c = 0; c < cases; ++c) {
    TestCase tc;
    tc.name = "case_" + std::to_string(c + 1);
    const int states = pick(rng, 1, max_states);
    for (int s = 0; s < states; ++s) {
      TestState st;
      if (suite.dwell_column) st.dwell_cycles = static_cast<std::uint32_t>(pick(rng, 1, 4));
      for (const auto& v : ins) {
        if (s == 0 || pick(rng, 0, 2)) st.inputs[v.name] = random_literal(v.type, rng);
      }
      for (const auto& v : outs) {
        if (pick(rng, 0, 2) == 0) st.expected[v.name] = random_literal(v.type, rng);
      }
      tc.states.push_back(std::move(st));
    }
    if (!outs.empty()) {
      auto& last = tc.states.back();
      const auto& v = outs[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(outs.size()) - 1))];
      last.expected[v.name] = random_literal(v.type, rng);
    }
    suite.cases.push_back(std::move(tc));
  }
  return suite;
}

TestSuite random_raw_suite(std::mt19937& rng) {
  const std::string cell_chars = "ab1 ,\"'\n\r#.";
  TestSuite suite;
  for (int i = 0, n = pick(rng, 0, 4); i < n; ++i) suite.input_columns.push_back("IN" + std::to_string(i));
  for (int i = 0, n = pick(rng, 0, 3); i < n; ++i) suite.output_columns.push_back("OUT" + std::to_string(i));
  suite.dwell_column = pick(rng, 0, 1);
  for (int c = 0, n = pick(rng, 1, 4); c < n; ++c) {
    TestCase tc;
    tc.name = "t" + std::to_string(c) + (pick(rng, 0, 1) ? ",x" : "");
    for (int s = 0, m = pick(rng, 1, 3); s < m; ++s) {
      TestState st;
      if (suite.dwell_column) st.dwell_cycles = static_cast<std::uint32_t>(pick(rng, 1, 50));
      for (const auto& col : suite.input_columns) {
        if (pick(rng, 0, 2)) st.inputs[col] = random_text(rng, 6, cell_chars);
      }
      for (const auto& col : suite.output_columns) {
        if (pick(rng, 0, 2)) st.expected[col] = random_text(rng, 6, cell_chars);
      }
      tc.states.push_back(std::move(st));
    }
    suite.cases.push_back(std::move(tc));
  }
  return suite;
}

}  // namespace sttest::testkit
