#include "sttest/app.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "sttest/corpus.hpp"
#include "sttest/diagnostic.hpp"

namespace sttest {

namespace fs = std::filesystem;

void RunConfig::validate(Command cmd) const {
  if (unit.empty()) throw std::invalid_argument("no unit file given (--unit)");
  if (cycle_time_ms < 1) throw std::invalid_argument("cycle time must be at least 1 ms");
  if (atol < 0 || rtol < 0) throw std::invalid_argument("tolerances must not be negative");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  if (max_scans < 1) throw std::invalid_argument("max scans must be at least 1");
  if (cmd == Command::Run) {
    if (suites.empty()) throw std::invalid_argument("run needs a suite file (--suite)");
  } else {
    if (!suites.empty())
      throw std::invalid_argument("a suite file and LLM generation are exclusive; use `run` for --suite");
    provider.validate();
    if (provider.provider == "mock" && provider.fixture.empty())
      throw std::invalid_argument("the mock provider needs a response file (--fixture)");
  }
}

fs::path RunConfig::run_dir() const { return label.empty() ? fs::path(out) : fs::path(out) / label; }

// ---- configuration file ---------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T number(const std::string& text, const std::string& where) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", where, text));
  return v;
}

double real_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(fmt::format("{}: '{}' is not a number", where, text));
}

bool boolean(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument(fmt::format("{}: '{}' is not true or false", where, text));
}

}  // namespace

void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = fmt::format("{}:{}", origin, line_no);
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') continue;  // sections are decoration
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(std::string_view(value).substr(0, hash));
    }
    auto& p = cfg.provider;
    if (key == "unit") cfg.unit = value;
    else if (key == "lib") cfg.libs.push_back(value);
    else if (key == "fb") cfg.fb = value;
    else if (key == "mode") cfg.mode = parse_mode(value);
    else if (key == "provider") p.provider = value;
    else if (key == "fixture") p.fixture = value;
    else if (key == "endpoint") p.endpoint = value;
    else if (key == "model") p.model = value;
    else if (key == "temperature") p.temperature = real_number(value, where);
    else if (key == "max_tokens") p.max_tokens = number<std::int64_t>(value, where);
    else if (key == "api_key_env") p.api_key_env = value;
    else if (key == "timeout_ms") p.timeout_ms = number<std::int64_t>(value, where);
    else if (key == "content_path") p.content_path = value;
    else if (key == "model_field") p.model_field = value;
    else if (key == "messages_field") p.messages_field = value;
    else if (key == "cycle_time_ms") cfg.cycle_time_ms = number<std::int64_t>(value, where);
    else if (key == "atol") cfg.atol = real_number(value, where);
    else if (key == "rtol") cfg.rtol = real_number(value, where);
    else if (key == "out") cfg.out = value;
    else if (key == "suite") cfg.suites.push_back(value);
    else if (key == "label") cfg.label = value;
    else if (key == "prompts") cfg.prompts_dir = value;
    else if (key == "max_scans") cfg.max_scans = number<std::uint64_t>(value, where);
    else if (key == "jobs") cfg.jobs = number<int>(value, where);
    else if (key == "fixed_clock") cfg.fixed_clock = boolean(value, where);
    else throw std::invalid_argument(fmt::format("{}: unknown key '{}'", where, key));
  }
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str(), path.string());
}

// ---- commands -------------------------------------------------------------

namespace {

SourceUnit read_source(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path))
    throw PipelineError(PipelinePhase::Generate, fmt::format("{} file not found: {}", what, path));
  try {
    return SourceUnit::from_file(path);
  } catch (const std::exception& e) {
    throw PipelineError(PipelinePhase::Generate, fmt::format("cannot read {}: {}", path, e.what()));
  }
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw PipelineError(PipelinePhase::Generate, "cannot write " + path.string());
}

struct Unit {
  SourceUnit src;
  std::vector<SourceUnit> libs;
  std::shared_ptr<const TypedProgram> prog;
  std::string fb;
};

Unit load_unit(const RunConfig& cfg) {
  Unit u{read_source(cfg.unit, "unit"), {}, nullptr, cfg.fb};
  std::vector<std::shared_ptr<const TypedProgram>> compiled;
  try {
    for (const auto& lib : cfg.libs) {
      u.libs.push_back(read_source(lib, "library"));
      compiled.push_back(compile(u.libs.back(), compiled));
    }
    u.prog = compile(u.src, compiled);
  } catch (const CompileError& e) {
    throw PipelineError(PipelinePhase::Generate, e.what(), "fix the reported source errors first");
  }
  if (u.fb.empty()) {
    auto fb = default_fb_under_test(*u.prog);
    if (!fb) throw PipelineError(PipelinePhase::Generate, cfg.unit + " declares no FUNCTION_BLOCK", "pass --fb");
    u.fb = *fb;
  }
  const PouInfo* pou = u.prog->find_local_pou(u.fb);
  if (pou == nullptr || pou->kind != PouKind::FunctionBlock)
    throw PipelineError(PipelinePhase::Generate, fmt::format("{} is not a function block of {}", u.fb, cfg.unit));
  return u;
}

CheckedSuite check(const Unit& u, std::string_view csv, const std::string& origin) {
  try {
    return validate(parse_suite(csv, u.fb), *u.prog, ValidationPolicy::Tolerant);
  } catch (const CsvError& e) {
    throw PipelineError(PipelinePhase::Generate, fmt::format("{}:{}:{}: {}", origin, e.row(), e.column(), e.message()));
  } catch (const ValidationError& e) {
    std::string msg = origin + " does not fit " + u.fb + ":";
    for (const auto& i : e.issues()) msg += "\n  " + i.describe();
    throw PipelineError(PipelinePhase::Generate, msg, "correct the suite columns and literals");
  }
}

RunSettings settings_of(const RunConfig& cfg) {
  RunSettings s;
  s.harness.atol = cfg.atol;
  s.harness.rtol = cfg.rtol;
  s.harness.cycle_time_ms = cfg.cycle_time_ms;
  s.max_scans = cfg.max_scans;
  s.mode = std::string(mode_name(cfg.mode));
  s.provider = cfg.provider.provider;
  s.fixed_clock = cfg.fixed_clock;
  return s;
}

RunResult run_one(const RunConfig& cfg, const Unit& u, const std::string& suite_path, const fs::path& dir) {
  if (!fs::is_regular_file(suite_path))
    throw PipelineError(PipelinePhase::Generate, "suite file not found: " + suite_path);
  const std::string csv = read_all(suite_path);
  const CheckedSuite suite = check(u, csv, suite_path);
  SuiteRun run = run_suite(u.src, u.libs, suite, settings_of(cfg));
  write_artifacts(run, csv, dir);
  RunResult r;
  r.run_dir = dir;
  r.report = std::move(run.report);
  r.exit_code = r.report.all_passed() ? 0 : 1;
  return r;
}

}  // namespace

GenerateResult cmd_generate(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate(Command::Generate);
  } catch (const std::invalid_argument& e) {
    throw PipelineError(PipelinePhase::Generate, e.what());
  }
  const Unit u = load_unit(cfg);
  GenerateResult g;
  g.run_dir = cfg.run_dir();
  std::error_code ec;
  fs::create_directories(g.run_dir, ec);
  if (ec) throw PipelineError(PipelinePhase::Generate, fmt::format("cannot create {}: {}", g.run_dir.string(), ec.message()));

  const PromptTemplates templates =
      cfg.prompts_dir.empty() ? PromptTemplates::defaults() : PromptTemplates::load(cfg.prompts_dir);
  const PromptBundle bundle = build_prompt(u.src.text(), InterfaceSummary::of(*u.prog->find_pou(u.fb)), cfg.mode,
                                           cfg.cycle_time_ms, templates);
  write_all(g.run_dir / "prompt.txt", bundle.full());

  LlmExchange exchange;
  try {
    ExchangeLog exchanges(g.run_dir);
    exchange = query(cfg.provider, bundle, &exchanges, cfg.fixed_clock);
  } catch (const AuthError& e) {
    throw PipelineError(PipelinePhase::Generate, e.what(),
                        fmt::format("export {} or use --provider mock", cfg.provider.api_key_env));
  } catch (const LlmError& e) {
    throw PipelineError(PipelinePhase::Generate, e.what(), "check the endpoint and retry later");
  }
  log << fmt::format("{} responded in {} ms\n", exchange.provider, exchange.latency_ms);

  std::string csv;
  try {
    csv = extract_csv(exchange.response);
  } catch (const NoCsvFound& e) {
    throw PipelineError(PipelinePhase::Generate, e.what(),
                        fmt::format("the raw response is in {}", (g.run_dir / "exchange_1.json").string()));
  }
  g.suite_path = g.run_dir / "suite.csv";
  const CheckedSuite suite = check(u, csv, "generated suite");
  write_all(g.suite_path, csv);
  g.cases = suite.cases.size();
  g.warnings = suite.warnings;
  for (const auto& w : g.warnings) log << "warning: " << w << "\n";
  log << fmt::format("{} test cases written to {}\n", g.cases, g.suite_path.string());
  return g;
}

std::vector<RunResult> cmd_run(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate(Command::Run);
  } catch (const std::invalid_argument& e) {
    throw PipelineError(PipelinePhase::Generate, e.what());
  }
  const Unit u = load_unit(cfg);
  const fs::path base = cfg.run_dir();
  if (cfg.suites.size() == 1) return {run_one(cfg, u, cfg.suites[0], base)};

  std::vector<RunResult> results(cfg.suites.size());
  std::vector<std::exception_ptr> errors(cfg.suites.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.suites.size(); i = next++) {
      try {
        results[i] = run_one(cfg, u, cfg.suites[i], base / fs::path(cfg.suites[i]).stem());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), cfg.suites.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& r : results) log << fmt::format("{}: exit {}\n", r.run_dir.string(), r.exit_code);
  return results;
}

RunResult cmd_pipeline(const RunConfig& cfg, std::ostream& log) {
  const GenerateResult g = cmd_generate(cfg, log);
  RunConfig run_cfg = cfg;
  run_cfg.suites = {g.suite_path.string()};
  return cmd_run(run_cfg, log).front();
}

std::string cmd_corpus_list(const fs::path& corpus_dir) { return render_corpus_list(corpus_dir); }

}  // namespace sttest
