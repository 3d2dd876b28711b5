#include "sttest/harness.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

#include "sttest/parser.hpp"
#include "sttest_templates.hpp"

namespace sttest {

std::string_view default_harness_template() { return embedded::kHarnessTemplate; }

CollisionError::CollisionError(const std::string& name)
    : std::runtime_error("generated name '" + name + "' clashes with a declared POU"), name_(name) {}

AssemblyError::AssemblyError(std::string part, const CompileError& cause)
    : std::runtime_error("in " + part + ": " + cause.what()), part_(std::move(part)),
      diagnostics_(cause.diagnostics()) {}

namespace {

// ST literal for a typed expected value
std::string st_literal(const Value& v) {
  switch (v.kind()) {
    case TypeKind::Time: return format_time_literal(v.as_int());
    case TypeKind::String: return quote_st_string(v.as_string());
    case TypeKind::Real:
    case TypeKind::LReal: return format_real_literal(v.as_real());
    default: return v.to_literal();
  }
}

std::string real_text(double v) {
  // %.17g keeps every bit; force a real literal
  std::string s = fmt::format("{:.17g}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string act_type(const Type& t) {
  if (t.kind == TypeKind::Real || t.kind == TypeKind::LReal) return "LREAL";
  return type_name(t);
}

std::string call_args(const std::map<std::string, Value>& inputs) {
  std::string out;
  for (const auto& [name, v] : inputs) {
    if (!out.empty()) out += ", ";
    out += name + " := " + st_literal(v);
  }
  return out;
}

const char* const kLocalNames[] = {"UUT", "STEP_NO", "DWELL_CNT", "CHECK_STATE", "RESULT", "DONE", "PASS", "FAILS"};

}  // namespace

std::string generate_case_fb(const CheckedCase& tc, const PouInfo& fb, std::size_t index,
                             const HarnessOptions& opt, CaseHarness* info) {
  for (const char* n : kLocalNames) {
    if (fb.name == n) throw CollisionError(fb.name);
  }
  const std::string name = fmt::format("TEST_CASE_{}", index);
  std::map<std::string, Type> outputs;
  for (const auto& v : interface_of(fb)) {
    if (v.section == Section::Output) outputs.emplace(v.name, v.type);
  }

  CaseHarness h;
  h.case_name = tc.name;
  h.fb_name = name;
  h.instance = fmt::format("TC_{}", index);
  h.done_hook = h.instance + "_DONE";
  h.pass_hook = h.instance + "_PASS";
  h.fails_hook = h.instance + "_FAILS";
  for (std::size_t s = 0; s < tc.states.size(); ++s) {
    h.scans += tc.states[s].dwell_cycles;
    for (const auto& [out, v] : tc.states[s].expected) {
      CheckSite c;
      c.index = static_cast<std::uint32_t>(h.checks.size() + 1);
      c.state = s + 1;
      c.output = out;
      c.expected = v;
      c.actual_var = fmt::format("ACT_{}", c.index);
      h.checks.push_back(std::move(c));
    }
  }
  h.scans += 1;

  std::string src = fmt::format("(* test case '{}' *)\nFUNCTION_BLOCK {}\n", tc.name, name);
  src += "VAR_OUTPUT\n    DONE : BOOL;\n    PASS : BOOL;\n    FAILS : INT;\nEND_VAR\nVAR\n";
  src += fmt::format("    UUT : {};\n    STEP_NO : INT := 1;\n    DWELL_CNT : DINT;\n    CHECK_STATE : INT;\n", fb.name);
  if (!h.checks.empty()) src += fmt::format("    RESULT : ARRAY[1..{}] OF INT;\n", h.checks.size());
  for (const auto& c : h.checks) src += fmt::format("    {} : {};\n", c.actual_var, act_type(outputs.at(c.output)));
  src += "END_VAR\n\nIF NOT DONE THEN\n";

  // checks for the state whose last call ran in the previous scan
  if (!h.checks.empty()) {
    src += "    CASE CHECK_STATE OF\n";
    for (std::size_t s = 1; s <= tc.states.size(); ++s) {
      bool any = false;
      for (const auto& c : h.checks) {
        if (c.state != s) continue;
        if (!any) src += fmt::format("    {}:\n", s);
        any = true;
        const Type& t = outputs.at(c.output);
        src += fmt::format("        {} := UUT.{};\n", c.actual_var, c.output);
        std::string cond;
        if (t.kind == TypeKind::Real || t.kind == TypeKind::LReal) {
          const double e = c.expected.as_real();
          const double tol = opt.atol + opt.rtol * std::fabs(e);
          cond = fmt::format("ABS({} - ({})) <= {}", c.actual_var, real_text(e), real_text(tol));
        } else {
          cond = fmt::format("{} = {}", c.actual_var, st_literal(c.expected));
        }
        src += fmt::format("        IF {} THEN\n            RESULT[{}] := 1;\n        ELSE\n"
                           "            RESULT[{}] := 2;\n            FAILS := FAILS + 1;\n        END_IF;\n",
                           cond, c.index, c.index);
      }
    }
    src += "    END_CASE;\n    CHECK_STATE := 0;\n";
  }

  src += fmt::format("    IF STEP_NO > {} THEN\n        DONE := TRUE;\n        PASS := FAILS = 0;\n", tc.states.size());
  src += "    ELSE\n        CASE STEP_NO OF\n";
  for (std::size_t s = 0; s < tc.states.size(); ++s) {
    const auto& st = tc.states[s];
    src += fmt::format("        {}:\n            UUT({});\n", s + 1, call_args(st.inputs));
    if (st.dwell_cycles > 1) {
      src += fmt::format("            DWELL_CNT := DWELL_CNT + 1;\n            IF DWELL_CNT >= {} THEN\n"
                         "                DWELL_CNT := 0;\n                CHECK_STATE := {};\n"
                         "                STEP_NO := {};\n            END_IF;\n",
                         st.dwell_cycles, s + 1, s + 2);
    } else {
      src += fmt::format("            CHECK_STATE := {};\n            STEP_NO := {};\n", s + 1, s + 2);
    }
  }
  src += "        END_CASE;\n    END_IF;\nEND_IF;\nEND_FUNCTION_BLOCK\n";
  if (info) *info = std::move(h);
  return src;
}

HarnessBundle generate_harness(const CheckedSuite& suite, const TypedProgram& unit, const HarnessOptions& opt) {
  const PouInfo* fb = suite.fb ? suite.fb : unit.find_local_pou(suite.fb_under_test);
  if (!fb) throw UnknownPou(suite.fb_under_test, "function block");
  HarnessBundle b;
  b.fb_under_test = fb->name;
  b.options = opt;
  for (std::size_t i = 0; i < suite.cases.size(); ++i) {
    CaseHarness h;
    b.test_fbs += generate_case_fb(suite.cases[i], *fb, i + 1, opt, &h);
    b.test_fbs += "\n";
    if (unit.find_pou(h.fb_name)) throw CollisionError(h.fb_name);
    b.instance_decls += fmt::format("    {} : {};\n    {} : BOOL;\n    {} : BOOL;\n    {} : INT;\n", h.instance,
                                    h.fb_name, h.done_hook, h.pass_hook, h.fails_hook);
    b.test_calls += fmt::format("{}();\n{} := {}.DONE;\n{} := {}.PASS;\n{} := {}.FAILS;\n", h.instance, h.done_hook,
                                h.instance, h.pass_hook, h.instance, h.fails_hook, h.instance);
    b.fb_names[h.case_name] = h.fb_name;
    b.cases.push_back(std::move(h));
  }
  if (!b.instance_decls.empty()) b.instance_decls.pop_back();
  if (!b.test_calls.empty()) b.test_calls.pop_back();
  return b;
}

const Segment* AssembledProgram::segment_at(std::size_t line) const {
  for (const auto& s : segments) {
    if (line >= s.first_line && line < s.first_line + s.line_count) return &s;
  }
  return nullptr;
}

namespace {

std::size_t count_lines(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::string replace_all(std::string s, std::string_view key, std::string_view with) {
  for (std::size_t p = s.find(key); p != std::string::npos; p = s.find(key, p + with.size()))
    s.replace(p, key.size(), with);
  return s;
}

void check_parses(const std::string& part, const SourceUnit& src) {
  try {
    parse_source(src);
  } catch (const CompileError& e) {
    throw AssemblyError(part, e);
  }
}

std::string with_newline(std::string s) {
  if (!s.empty() && s.back() != '\n') s += '\n';
  return s;
}

}  // namespace

AssembledProgram assemble_program(const HarnessBundle& bundle, std::string_view tmpl, const SourceUnit& unit_src,
                                  const std::vector<SourceUnit>& library_srcs, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> parts;
  for (const auto& lib : library_srcs) {
    check_parses("library:" + lib.origin(), lib);
    parts.emplace_back("library:" + lib.origin(), with_newline(lib.text()));
  }
  check_parses("unit", unit_src);
  parts.emplace_back("unit", with_newline(unit_src.text()));
  check_parses("tests", SourceUnit(bundle.test_fbs, "tests"));
  parts.emplace_back("tests", with_newline(bundle.test_fbs));

  std::string program(tmpl);
  program = replace_all(program, "{TEST_INSTANCE_DECLS}", bundle.instance_decls);
  program = replace_all(program, "{TEST_CALLS}", bundle.test_calls);
  program = replace_all(program, "{CYCLE_TIME_MS}", std::to_string(bundle.options.cycle_time_ms));
  const auto slot = program.find("{UNIT_DECLS}");
  const std::string head = slot == std::string::npos ? std::string() : program.substr(0, slot);
  const std::string tail = slot == std::string::npos ? program : program.substr(slot + 12);
  check_parses("template", SourceUnit(head + tail, "template"));

  AssembledProgram out;
  std::string text = head;
  std::size_t line = 1 + count_lines(head);
  if (line > 1) out.segments.push_back({"template", 1, line - 1});
  for (auto& [part, body] : parts) {
    out.segments.push_back({part, line, count_lines(body)});
    line += count_lines(body);
    text += body;
  }
  out.segments.push_back({"template", line, count_lines(tail) + 1});
  text += tail;
  out.source = SourceUnit(std::move(text), origin);
  try {
    out.program = compile(out.source);
  } catch (const CompileError& e) {
    const Segment* seg = e.diagnostics().empty() ? nullptr : out.segment_at(e.diagnostics()[0].span.begin.line);
    throw AssemblyError(seg ? seg->part : std::string("assembly"), e);
  }
  return out;
}

}  // namespace sttest
