#include "sttest/testspec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace sttest {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<std::int64_t> positive(const std::string& text) {
  std::int64_t v = 0;
  const std::string t = trim(text);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || v < 1) return std::nullopt;
  return v;
}

enum class Role { Name, State, Dwell, Input, Output };

}  // namespace

TestSuite parse_suite(std::string_view csv_text, std::string fb_under_test) {
  const auto rows = read_csv(csv_text);
  if (rows.empty()) throw CsvError(1, 0, "missing header");
  const auto& header = rows[0];

  TestSuite suite;
  suite.fb_under_test = std::move(fb_under_test);
  std::vector<Role> roles;
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.fields.size(); ++c) {
    const std::string raw = trim(header.fields[c]);
    const std::string u = upper(raw);
    if (!seen.insert(u).second) throw CsvError(header.line, c + 1, "duplicate column '" + raw + "'");
    if (u == "TEST_NAME") {
      roles.push_back(Role::Name);
    } else if (u == "STATE") {
      roles.push_back(Role::State);
    } else if (u == "DWELL_CYCLES") {
      roles.push_back(Role::Dwell);
      suite.dwell_column = true;
    } else if (u.rfind(upper(kExpectPrefix), 0) == 0 && u.size() > kExpectPrefix.size()) {
      roles.push_back(Role::Output);
      suite.output_columns.push_back(u.substr(kExpectPrefix.size()));
    } else if (!u.empty()) {
      roles.push_back(Role::Input);
      suite.input_columns.push_back(u);
    } else {
      throw CsvError(header.line, c + 1, "empty column name");
    }
    names.push_back(roles.back() == Role::Output ? u.substr(kExpectPrefix.size()) : u);
  }
  if (roles.empty() || roles[0] != Role::Name || roles.size() < 2 || roles[1] != Role::State)
    throw CsvError(header.line, 0, "missing header: expected test_name,state,...");

  struct Pending {
    std::int64_t index;
    TestState state;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Pending>> by_case;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.fields.size())
      throw CsvError(row.line, 0,
                     "ragged row: " + std::to_string(row.fields.size()) + " fields, header has " +
                         std::to_string(header.fields.size()));
    std::string name;
    std::int64_t index = 0;
    TestState st;
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
      const std::string& cell = row.fields[c];
      switch (roles[c]) {
        case Role::Name:
          name = trim(cell);
          if (name.empty()) throw CsvError(row.line, c + 1, "empty test_name");
          break;
        case Role::State: {
          auto v = positive(cell);
          if (!v) throw CsvError(row.line, c + 1, "state index must be a positive integer, got '" + cell + "'");
          index = *v;
          break;
        }
        case Role::Dwell: {
          if (trim(cell).empty()) break;
          auto v = positive(cell);
          if (!v || *v > 0xFFFFFFFF)
            throw CsvError(row.line, c + 1, "dwell_cycles must be a positive integer, got '" + cell + "'");
          st.dwell_cycles = static_cast<std::uint32_t>(*v);
          break;
        }
        case Role::Input:
          if (!cell.empty()) st.inputs[names[c]] = cell;
          break;
        case Role::Output:
          if (!cell.empty()) st.expected[names[c]] = cell;
          break;
      }
    }
    auto& states = by_case[name];
    if (states.empty()) order.push_back(name);
    for (const auto& p : states) {
      if (p.index == index)
        throw CsvError(row.line, 0, "duplicate state " + std::to_string(index) + " for test '" + name + "'");
    }
    states.push_back({index, std::move(st)});
  }
  for (const auto& name : order) {
    auto& states = by_case[name];
    std::stable_sort(states.begin(), states.end(),
                     [](const Pending& a, const Pending& b) { return a.index < b.index; });
    TestCase tc;
    tc.name = name;
    for (auto& p : states) tc.states.push_back(std::move(p.state));
    suite.cases.push_back(std::move(tc));
  }
  return suite;
}

std::string serialize_suite(const TestSuite& suite) {
  std::vector<std::string> header{"test_name", "state"};
  if (suite.dwell_column) header.push_back("dwell_cycles");
  for (const auto& c : suite.input_columns) header.push_back(c);
  for (const auto& c : suite.output_columns) header.push_back(std::string(kExpectPrefix) + c);
  std::string out = csv_line(header) + "\n";
  for (const auto& tc : suite.cases) {
    for (std::size_t s = 0; s < tc.states.size(); ++s) {
      const auto& st = tc.states[s];
      std::vector<std::string> row{tc.name, std::to_string(s + 1)};
      if (suite.dwell_column) row.push_back(std::to_string(st.dwell_cycles));
      for (const auto& c : suite.input_columns) {
        auto it = st.inputs.find(c);
        row.push_back(it == st.inputs.end() ? std::string() : it->second);
      }
      for (const auto& c : suite.output_columns) {
        auto it = st.expected.find(c);
        row.push_back(it == st.expected.end() ? std::string() : it->second);
      }
      out += csv_line(row) + "\n";
    }
  }
  return out;
}

bool CheckedCase::has_assertions() const {
  return std::any_of(states.begin(), states.end(), [](const CheckedState& s) { return !s.expected.empty(); });
}

std::string ValidationIssue::describe() const {
  std::string where;
  if (!test_case.empty()) where += "test '" + test_case + "'";
  if (state) where += (where.empty() ? "" : " ") + std::string("state ") + std::to_string(state);
  if (!column.empty()) where += (where.empty() ? "" : " ") + std::string("column ") + column;
  return where.empty() ? message : where + ": " + message;
}

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::string out = "invalid test suite";
  for (const auto& i : issues) out += "\n  " + i.describe();
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::optional<std::string> default_fb_under_test(const TypedProgram& prog) {
  for (auto it = prog.pous().rbegin(); it != prog.pous().rend(); ++it) {
    if ((*it)->kind == PouKind::FunctionBlock) return (*it)->name;
  }
  return std::nullopt;
}

CheckedSuite validate(const TestSuite& suite, const TypedProgram& prog, ValidationPolicy policy) {
  std::string fb_name = suite.fb_under_test;
  if (fb_name.empty()) fb_name = default_fb_under_test(prog).value_or("");
  const PouInfo* fb = prog.find_local_pou(fb_name);
  if (!fb || fb->kind != PouKind::FunctionBlock) throw UnknownPou(fb_name, "function block");

  CheckedSuite out;
  out.fb_under_test = fb->name;
  out.fb = fb;
  std::vector<ValidationIssue> errors;
  const bool tolerant = policy == ValidationPolicy::Tolerant;

  std::map<std::string, Type> inputs, outputs;
  for (const auto& v : interface_of(*fb)) {
    if (v.section == Section::Input) inputs.emplace(v.name, v.type);
    if (v.section == Section::Output) outputs.emplace(v.name, v.type);
  }

  auto check_columns = [&](const std::vector<std::string>& cols, const std::map<std::string, Type>& declared,
                           const char* what, const std::string& prefix, std::vector<std::string>& keep) {
    for (const auto& c : cols) {
      if (declared.count(c)) {
        keep.push_back(c);
        continue;
      }
      const std::string msg = std::string("unknown column: '") + c + "' is not a " + what + " of " + fb->name;
      if (tolerant) {
        out.warnings.push_back(prefix + c + ": " + msg + "; column dropped");
        out.dropped_columns.push_back(prefix + c);
      } else {
        errors.push_back({prefix + c, {}, 0, msg});
      }
    }
  };
  check_columns(suite.input_columns, inputs, "VAR_INPUT", "", out.input_columns);
  check_columns(suite.output_columns, outputs, "VAR_OUTPUT", std::string(kExpectPrefix), out.output_columns);

  if (suite.cases.empty()) errors.push_back({{}, {}, 0, "suite has no test cases"});

  std::set<std::string> names;
  for (const auto& tc : suite.cases) {
    if (!names.insert(tc.name).second) errors.push_back({{}, tc.name, 0, "duplicate test case name"});
    CheckedCase cc;
    cc.name = tc.name;
    if (tc.states.empty()) errors.push_back({{}, tc.name, 0, "test case has no states"});
    for (std::size_t s = 0; s < tc.states.size(); ++s) {
      const auto& st = tc.states[s];
      CheckedState cs;
      cs.dwell_cycles = st.dwell_cycles;
      if (st.dwell_cycles < 1) errors.push_back({"dwell_cycles", tc.name, s + 1, "dwell_cycles must be >= 1"});
      auto typed = [&](const std::map<std::string, std::string>& cells, const std::map<std::string, Type>& declared,
                       const std::string& prefix, std::map<std::string, Value>& dest) {
        for (const auto& [col, text] : cells) {
          auto d = declared.find(col);
          if (d == declared.end()) continue;  // reported once per column above
          std::string err;
          auto v = parse_value_literal(text, d->second, err);
          if (!v) errors.push_back({prefix + col, tc.name, s + 1, "unparseable literal: " + err});
          else dest.emplace(col, *v);
        }
      };
      typed(st.inputs, inputs, "", cs.inputs);
      typed(st.expected, outputs, std::string(kExpectPrefix), cs.expected);
      cc.states.push_back(std::move(cs));
    }
    if (!tc.states.empty() && !cc.has_assertions()) {
      const std::string msg = "no assertable state: no expected output is set";
      if (tolerant) out.warnings.push_back("test '" + tc.name + "': " + msg + "; kept without checks");
      else errors.push_back({{}, tc.name, 0, msg});
    }
    out.cases.push_back(std::move(cc));
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return out;
}

}  // namespace sttest
