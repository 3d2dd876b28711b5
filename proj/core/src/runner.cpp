#include "sttest/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "json.hpp"

namespace sttest {

namespace {

enum class Family { Bool, Integer, Float, Time, String };

Family family_of(TypeKind k) {
  switch (k) {
    case TypeKind::Bool: return Family::Bool;
    case TypeKind::Real:
    case TypeKind::LReal: return Family::Float;
    case TypeKind::Time: return Family::Time;
    case TypeKind::String: return Family::String;
    default: return Family::Integer;
  }
}

std::string shown(const Value& v) {
  return v.kind() == TypeKind::String ? quote_st_string(v.as_string()) : v.to_literal();
}

std::string centi_text(std::int64_t centi) { return fmt::format("{}.{:02}", centi / 100, centi % 100); }

}  // namespace

Comparison compare(const Value& expected, const Value& actual, const ComparePolicy& policy) {
  const Family fe = family_of(expected.kind());
  const Family fa = family_of(actual.kind());
  if (fe != fa) {
    throw TypeMismatch(fmt::format("cannot compare {} with {}", kind_name(expected.kind()),
                                   kind_name(actual.kind())));
  }
  Comparison c;
  c.detail = fmt::format("expected {}, actual {}", shown(expected), shown(actual));
  switch (fe) {
    case Family::Bool: c.pass = expected.as_bool() == actual.as_bool(); break;
    case Family::Integer:
    case Family::Time: c.pass = expected.as_int() == actual.as_int(); break;
    case Family::String: c.pass = expected.as_string() == actual.as_string(); break;
    case Family::Float: {
      const double e = expected.as_real();
      const double a = actual.as_real();
      c.pass = std::fabs(a - e) <= policy.atol + policy.rtol * std::fabs(e);
      break;
    }
  }
  return c;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Fault: return "fault";
  }
  return "?";
}

std::string TestReport::assertion_success_text() const {
  return assertion_success_centi ? centi_text(*assertion_success_centi) : "n/a";
}

std::string TestReport::statement_coverage_text() const { return centi_text(statement_coverage_centi); }

bool TestReport::all_passed() const {
  if (assertions_passed != assertions_total) return false;
  return std::all_of(cases.begin(), cases.end(), [](const CaseReport& c) { return c.verdict == Verdict::Pass; });
}

std::string_view phase_label(PipelinePhase p) {
  switch (p) {
    case PipelinePhase::Generate: return "generate";
    case PipelinePhase::Assemble: return "assemble";
    case PipelinePhase::Execute: return "execute";
    case PipelinePhase::Report: return "report";
  }
  return "?";
}

PipelineError::PipelineError(PipelinePhase phase, const std::string& message, std::string hint)
    : std::runtime_error(fmt::format("[{}] {}", phase_label(phase), message)),
      phase_(phase),
      hint_(std::move(hint)) {}

// ---- rendering ------------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json coverage_json(const CoverageLine& c) {
  return {{"pou", c.pou}, {"total", c.total}, {"hit", c.hit}, {"pct", static_cast<double>(c.centi_percent) / 100.0}};
}

CoverageLine coverage_from(const nlohmann::json& j) {
  return {j.at("pou").get<std::string>(), j.at("total").get<std::uint64_t>(), j.at("hit").get<std::uint64_t>(),
          std::llround(j.at("pct").get<double>() * 100.0)};
}

std::string render_json(const TestReport& r) {
  ordered_json j;
  j["schema"] = 1;
  const auto& m = r.run;
  j["run"] = {{"unit", m.unit},
              {"fb_under_test", m.fb_under_test},
              {"mode", m.mode},
              {"provider", m.provider},
              {"cycle_time_ms", m.cycle_time_ms},
              {"cycles_executed", m.cycles_executed},
              {"cycle_budget", m.cycle_budget},
              {"atol", m.atol},
              {"rtol", m.rtol},
              {"generated_at", m.generated_at},
              {"warnings", m.warnings},
              {"dropped_columns", m.dropped_columns}};
  ordered_json metrics;
  metrics["cases_total"] = r.cases_total;
  metrics["assertions_total"] = r.assertions_total;
  metrics["assertions_passed"] = r.assertions_passed;
  metrics["assertion_success_pct"] = r.assertion_success_centi
                                         ? ordered_json(static_cast<double>(*r.assertion_success_centi) / 100.0)
                                         : ordered_json("n/a");
  metrics["statement_coverage_pct"] = static_cast<double>(r.statement_coverage_centi) / 100.0;
  j["metrics"] = metrics;
  ordered_json cases = ordered_json::array();
  for (const auto& c : r.cases) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["verdict"] = verdict_name(c.verdict);
    cj["assertions"] = c.assertions;
    cj["passed"] = c.passed;
    cj["finished"] = c.finished;
    ordered_json failures = ordered_json::array();
    for (const auto& f : c.failures) {
      failures.push_back({{"state", f.state}, {"variable", f.variable}, {"expected", f.expected}, {"actual", f.actual}});
    }
    cj["failures"] = failures;
    if (c.fault) {
      cj["fault"] = {{"message", c.fault->message}, {"cycle", c.fault->cycle}, {"pou", c.fault->pou}, {"line", c.fault->line}};
    } else {
      cj["fault"] = nullptr;
    }
    cases.push_back(cj);
  }
  j["cases"] = cases;
  ordered_json pous = ordered_json::array();
  for (const auto& p : r.coverage_pous) pous.push_back(coverage_json(p));
  j["coverage"] = {{"pous", pous}, {"aggregate", coverage_json(r.coverage_aggregate)}};
  j["artifacts"] = r.artifacts;
  return j.dump(2) + "\n";
}

std::string render_text(const TestReport& r) {
  const auto& m = r.run;
  std::string out = fmt::format("Test report: {} ({})\n", m.fb_under_test, m.unit);
  out += fmt::format("mode: {}  provider: {}  cycle time: {} ms  cycles executed: {}\n", m.mode, m.provider,
                     m.cycle_time_ms, m.cycles_executed);
  for (const auto& w : m.warnings) out += fmt::format("warning: {}\n", w);
  std::size_t width = 4;
  for (const auto& c : r.cases) width = std::max(width, c.name.size());
  out += "\n";
  out += fmt::format("{:>3}  {:<{}}  {:<7}  {:>10}  {}\n", "#", "case", width, "verdict", "assertions", "detail");
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    const auto& c = r.cases[i];
    std::string detail;
    if (c.fault) {
      detail = fmt::format("cycle {}: {}", c.fault->cycle, c.fault->message);
    } else if (!c.failures.empty()) {
      const auto& f = c.failures.front();
      detail = fmt::format("state {}: {} expected {}, actual {}", f.state, f.variable, f.expected, f.actual);
      if (c.failures.size() > 1) detail += fmt::format(" (+{} more)", c.failures.size() - 1);
    } else if (!c.finished) {
      detail = "did not finish";
    }
    out += fmt::format("{:>3}  {:<{}}  {:<7}  {:>10}  {}", i + 1, c.name, width, verdict_name(c.verdict),
                       fmt::format("{}/{}", c.passed, c.assertions), detail);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  }
  out += "\n";
  out += fmt::format("cases: {}\n", r.cases_total);
  const std::string pct = r.assertion_success_centi ? r.assertion_success_text() + "%" : "n/a";
  out += fmt::format("assertions: {}/{} passed ({})\n", r.assertions_passed, r.assertions_total, pct);
  out += fmt::format("statement coverage: {}% ({}/{})\n", r.statement_coverage_text(), r.coverage_aggregate.hit,
                     r.coverage_aggregate.total);
  return out;
}

}  // namespace

std::string render_report(const TestReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? render_json(report) : render_text(report);
}

TestReport parse_report_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<int>() != 1) throw std::invalid_argument("unsupported report schema");
    TestReport r;
    const auto& run = j.at("run");
    auto& m = r.run;
    m.unit = run.at("unit").get<std::string>();
    m.fb_under_test = run.at("fb_under_test").get<std::string>();
    m.mode = run.at("mode").get<std::string>();
    m.provider = run.at("provider").get<std::string>();
    m.cycle_time_ms = run.at("cycle_time_ms").get<std::int64_t>();
    m.cycles_executed = run.at("cycles_executed").get<std::uint64_t>();
    m.cycle_budget = run.at("cycle_budget").get<std::uint64_t>();
    m.atol = run.at("atol").get<double>();
    m.rtol = run.at("rtol").get<double>();
    m.generated_at = run.at("generated_at").get<std::string>();
    m.warnings = run.at("warnings").get<std::vector<std::string>>();
    m.dropped_columns = run.at("dropped_columns").get<std::vector<std::string>>();
    const auto& metrics = j.at("metrics");
    r.cases_total = metrics.at("cases_total").get<std::uint64_t>();
    r.assertions_total = metrics.at("assertions_total").get<std::uint64_t>();
    r.assertions_passed = metrics.at("assertions_passed").get<std::uint64_t>();
    if (metrics.at("assertion_success_pct").is_number()) {
      r.assertion_success_centi = std::llround(metrics["assertion_success_pct"].get<double>() * 100.0);
    }
    r.statement_coverage_centi = std::llround(metrics.at("statement_coverage_pct").get<double>() * 100.0);
    for (const auto& cj : j.at("cases")) {
      CaseReport c;
      c.name = cj.at("name").get<std::string>();
      const auto v = cj.at("verdict").get<std::string>();
      c.verdict = v == "pass" ? Verdict::Pass : v == "fail" ? Verdict::Fail : Verdict::Fault;
      c.assertions = cj.at("assertions").get<std::uint64_t>();
      c.passed = cj.at("passed").get<std::uint64_t>();
      c.finished = cj.at("finished").get<bool>();
      for (const auto& f : cj.at("failures")) {
        c.failures.push_back({f.at("state").get<std::size_t>(), f.at("variable").get<std::string>(),
                              f.at("expected").get<std::string>(), f.at("actual").get<std::string>()});
      }
      if (!cj.at("fault").is_null()) {
        const auto& f = cj["fault"];
        c.fault = CaseFault{f.at("message").get<std::string>(), f.at("cycle").get<std::uint64_t>(),
                            f.at("pou").get<std::string>(), f.at("line").get<std::uint32_t>()};
      }
      r.cases.push_back(std::move(c));
    }
    for (const auto& p : j.at("coverage").at("pous")) r.coverage_pous.push_back(coverage_from(p));
    r.coverage_aggregate = coverage_from(j.at("coverage").at("aggregate"));
    r.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed report: {}", e.what()));
  }
}

// ---- execution ------------------------------------------------------------

namespace {

std::string timestamp(bool fixed) {
  if (fixed) return "1970-01-01T00:00:00Z";
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

std::vector<std::shared_ptr<const TypedProgram>> compile_libraries(const std::vector<SourceUnit>& srcs) {
  std::vector<std::shared_ptr<const TypedProgram>> libs;
  for (const auto& src : srcs) libs.push_back(compile(src, libs));
  return libs;
}

CoverageLine line_of(const PouCoverage& p) { return {p.pou, p.total, p.hit, p.centi_percent}; }

}  // namespace

SuiteRun run_suite(const SourceUnit& unit_src, const std::vector<SourceUnit>& library_srcs,
                   const CheckedSuite& suite, const RunSettings& settings) {
  if (suite.fb == nullptr) throw PipelineError(PipelinePhase::Generate, "suite has not been validated");

  std::shared_ptr<const TypedProgram> unit;
  try {
    unit = compile(unit_src, compile_libraries(library_srcs));
  } catch (const CompileError& e) {
    throw PipelineError(PipelinePhase::Generate, e.what(), "fix the unit or library sources");
  }

  HarnessBundle bundle;
  try {
    bundle = generate_harness(suite, *unit, settings.harness);
  } catch (const CollisionError& e) {
    throw PipelineError(PipelinePhase::Generate, e.what(), "rename the clashing POU or variable");
  } catch (const UnknownPou& e) {
    throw PipelineError(PipelinePhase::Generate, e.what());
  }

  AssembledProgram assembled;
  const std::string_view tmpl =
      settings.harness_template.empty() ? default_harness_template() : std::string_view(settings.harness_template);
  try {
    assembled = assemble_program(bundle, tmpl, unit_src, library_srcs);
  } catch (const AssemblyError& e) {
    throw PipelineError(PipelinePhase::Assemble, fmt::format("{} part: {}", e.part(), e.what()));
  }
  const TypedProgram& prog = *assembled.program;

  SuiteRun out;
  out.harness_source = assembled.source.text();

  std::uint64_t bound = 1;
  for (const auto& c : bundle.cases) bound = std::max(bound, c.scans + 1);
  bound = std::min(bound, settings.max_scans);

  const std::int64_t cycle_ms = prog.tasks().empty() ? settings.harness.cycle_time_ms : prog.tasks()[0].interval_ms;
  CoverageMap cov = CoverageMap::for_unit(prog);
  RunOptions opt;
  opt.cycles = bound;
  opt.isolate_faults = true;
  opt.on_trace = [&cov](const ExecTrace& t) { cov.accumulate(t); };
  opt.stop_when = [&bundle](const FbInstance& p) {
    for (const auto& c : bundle.cases) {
      if (!p.get(c.done_hook).as_bool() && !p.child(c.instance).faulted) return false;
    }
    return true;
  };
  SimClock clock{0, cycle_ms};
  ProgramRun pr;
  try {
    pr = run_program(prog, "TEST_MAIN", opt, clock);
  } catch (const RuntimeFault& e) {
    throw PipelineError(PipelinePhase::Execute, e.what());
  } catch (const UnknownPou& e) {
    throw PipelineError(PipelinePhase::Execute, e.what(), "the harness template must declare PROGRAM TEST_MAIN");
  }

  TestReport& r = out.report;
  try {
    auto& m = r.run;
    m.unit = unit_src.origin();
    m.fb_under_test = suite.fb_under_test;
    m.mode = settings.mode;
    m.provider = settings.provider;
    m.cycle_time_ms = cycle_ms;
    m.cycles_executed = pr.cycles_executed;
    m.cycle_budget = bound;
    m.atol = settings.harness.atol;
    m.rtol = settings.harness.rtol;
    m.generated_at = timestamp(settings.fixed_clock);
    m.warnings = suite.warnings;
    m.dropped_columns = suite.dropped_columns;

    std::map<std::string, const FaultRecord*> faults;
    for (const auto& f : pr.faults) faults.emplace(f.instance, &f);

    const FbInstance& program = *pr.program;
    for (const auto& h : bundle.cases) {
      CaseReport c;
      c.name = h.case_name;
      const FbInstance& tc = program.child(h.instance);
      c.finished = program.get(h.done_hook).as_bool();
      c.assertions = h.checks.size();
      const std::vector<Value>* results = h.checks.empty() ? nullptr : &tc.array("RESULT");
      for (const auto& chk : h.checks) {
        const std::int64_t res = (*results)[chk.index - 1].as_int();
        if (res == 1) {
          ++c.passed;
          continue;
        }
        FailedAssertion f;
        f.state = chk.state;
        f.variable = chk.output;
        f.expected = shown(chk.expected);
        f.actual = res == 2 ? shown(tc.get(chk.actual_var)) : "(not checked)";
        c.failures.push_back(std::move(f));
      }
      if (auto it = faults.find(h.instance); it != faults.end()) {
        const FaultRecord& fr = *it->second;
        std::uint32_t line = fr.span.begin.line;
        if (const Segment* seg = assembled.segment_at(line); seg != nullptr && seg->part == "unit") {
          line = static_cast<std::uint32_t>(line - seg->first_line + 1);
        }
        c.fault = CaseFault{fr.message, fr.cycle, fr.pou, line};
        c.verdict = Verdict::Fault;
      } else if (!c.failures.empty() || !c.finished) {
        c.verdict = Verdict::Fail;
      }
      r.assertions_total += c.assertions;
      r.assertions_passed += c.passed;
      r.cases.push_back(std::move(c));
    }
    r.cases_total = r.cases.size();
    if (r.assertions_total > 0) r.assertion_success_centi = centi_percent(r.assertions_passed, r.assertions_total);

    out.coverage = rebase(cov, prog, *unit);
    const CoverageSummary summary = summarize(out.coverage, *unit, suite.fb_under_test);
    for (const auto& p : summary.pous) r.coverage_pous.push_back(line_of(p));
    r.coverage_aggregate = line_of(summary.aggregate);
    r.statement_coverage_centi = summary.aggregate.centi_percent;
    out.lcov = render_lcov(out.coverage, *unit, unit_src);
    out.annotated = render_annotated(out.coverage, *unit, unit_src);
    r.artifacts = {{"annotated", "coverage.annotated.txt"}, {"lcov", "coverage.lcov"}};
  } catch (const std::exception& e) {
    throw PipelineError(PipelinePhase::Report, e.what());
  }
  return out;
}

void write_artifacts(const SuiteRun& run, std::string_view suite_csv, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PipelineError(PipelinePhase::Report, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  const std::pair<const char*, std::string> files[] = {
      {"report.json", render_report(run.report, ReportFormat::Json)},
      {"report.txt", render_report(run.report, ReportFormat::Text)},
      {"coverage.lcov", run.lcov},
      {"coverage.annotated.txt", run.annotated},
      {"harness.st", run.harness_source},
      {"suite.csv", std::string(suite_csv)},
  };
  for (const auto& [name, text] : files) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw PipelineError(PipelinePhase::Report, fmt::format("cannot write {}", (dir / name).string()));
  }
}

}  // namespace sttest
