#include <iostream>

#include "CLI11.hpp"
#include "sttest/app.hpp"
#include "sttest/corpus.hpp"

namespace {

struct Flags {
  std::string config;
  std::string mode;
};

// Options shared by generate, run and pipeline. Values land in `cfg` only
// when given, so a --config file can fill the rest.
void add_common(CLI::App* cmd, sttest::RunConfig& cfg, Flags& flags) {
  cmd->add_option("--config", flags.config, "key = value configuration file; flags win");
  cmd->add_option("--unit", cfg.unit, "ST source containing the function block under test");
  cmd->add_option("--lib", cfg.libs, "library ST source (repeatable)");
  cmd->add_option("--fb", cfg.fb, "function block under test (default: last one in the unit)");
  cmd->add_option("--mode", flags.mode, "prompt mode")->check(CLI::IsMember({"simple", "enhanced"}));
  cmd->add_option("--provider", cfg.provider.provider, "LLM provider")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--fixture", cfg.provider.fixture, "mock provider response file");
  cmd->add_option("--endpoint", cfg.provider.endpoint, "chat-completion URL");
  cmd->add_option("--model", cfg.provider.model, "model identifier");
  cmd->add_option("--temperature", cfg.provider.temperature, "sampling temperature in [0,2]");
  cmd->add_option("--max-tokens", cfg.provider.max_tokens, "maximum output tokens");
  cmd->add_option("--api-key-env", cfg.provider.api_key_env, "environment variable holding the API key");
  cmd->add_option("--timeout-ms", cfg.provider.timeout_ms, "request timeout");
  cmd->add_option("--prompts", cfg.prompts_dir, "directory with prompt template overrides");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--label", cfg.label, "run name; artifacts go to <out>/<label>");
  cmd->add_option("--cycle-time-ms", cfg.cycle_time_ms, "PLC cycle time");
  cmd->add_option("--atol", cfg.atol, "absolute tolerance for REAL checks");
  cmd->add_option("--rtol", cfg.rtol, "relative tolerance for REAL checks");
  cmd->add_option("--max-scans", cfg.max_scans, "hard cap on executed scans");
  cmd->add_option("--jobs", cfg.jobs, "parallel suite runs");
  cmd->add_flag("--fixed-clock", cfg.fixed_clock, "fixed timestamps and latencies for reproducible reports");
}

// Config file first, then the flags the user actually passed.
sttest::RunConfig resolve(CLI::App* cmd, const sttest::RunConfig& from_flags, const Flags& flags) {
  sttest::RunConfig cfg;
  if (!flags.config.empty()) sttest::apply_config_file(cfg, flags.config);
  auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (given("--unit")) cfg.unit = from_flags.unit;
  if (given("--lib")) cfg.libs = from_flags.libs;
  if (given("--fb")) cfg.fb = from_flags.fb;
  if (given("--mode")) cfg.mode = sttest::parse_mode(flags.mode);
  if (given("--provider")) cfg.provider.provider = from_flags.provider.provider;
  if (given("--fixture")) cfg.provider.fixture = from_flags.provider.fixture;
  if (given("--endpoint")) cfg.provider.endpoint = from_flags.provider.endpoint;
  if (given("--model")) cfg.provider.model = from_flags.provider.model;
  if (given("--temperature")) cfg.provider.temperature = from_flags.provider.temperature;
  if (given("--max-tokens")) cfg.provider.max_tokens = from_flags.provider.max_tokens;
  if (given("--api-key-env")) cfg.provider.api_key_env = from_flags.provider.api_key_env;
  if (given("--timeout-ms")) cfg.provider.timeout_ms = from_flags.provider.timeout_ms;
  if (given("--prompts")) cfg.prompts_dir = from_flags.prompts_dir;
  if (given("--out")) cfg.out = from_flags.out;
  if (given("--label")) cfg.label = from_flags.label;
  if (given("--cycle-time-ms")) cfg.cycle_time_ms = from_flags.cycle_time_ms;
  if (given("--atol")) cfg.atol = from_flags.atol;
  if (given("--rtol")) cfg.rtol = from_flags.rtol;
  if (given("--max-scans")) cfg.max_scans = from_flags.max_scans;
  if (given("--jobs")) cfg.jobs = from_flags.jobs;
  if (given("--fixed-clock")) cfg.fixed_clock = true;
  if (cmd->get_option_no_throw("--suite") != nullptr && given("--suite")) cfg.suites = from_flags.suites;
  return cfg;
}

int report_exit(const std::vector<sttest::RunResult>& results) {
  int code = 0;
  for (const auto& r : results) {
    std::cout << sttest::render_report(r.report, sttest::ReportFormat::Text);
    std::cout << "artifacts: " << r.run_dir.string() << "\n";
    code = std::max(code, r.exit_code);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate, run and measure unit tests for IEC 61131-3 Structured Text function blocks"};
  app.require_subcommand(1);

  sttest::RunConfig gen_cfg, run_cfg, pipe_cfg;
  Flags gen_flags, run_flags, pipe_flags;
  auto* gen = app.add_subcommand("generate", "ask the LLM for a test suite and write suite.csv");
  add_common(gen, gen_cfg, gen_flags);
  auto* run = app.add_subcommand("run", "run a suite file against the unit and write the report");
  add_common(run, run_cfg, run_flags);
  run->add_option("--suite", run_cfg.suites, "suite CSV (repeatable)");
  auto* pipe = app.add_subcommand("pipeline", "generate and run in one go");
  add_common(pipe, pipe_cfg, pipe_flags);

  auto* corpus = app.add_subcommand("corpus", "bundled example blocks");
  corpus->require_subcommand(1);
  std::string corpus_dir;
  auto* list = corpus->add_subcommand("list", "list the bundled blocks");
  list->add_option("--corpus", corpus_dir, "corpus directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      std::cout << sttest::cmd_corpus_list(corpus_dir.empty() ? sttest::default_corpus_dir() : std::filesystem::path(corpus_dir));
      return 0;
    }
    if (gen->parsed()) {
      const auto cfg = resolve(gen, gen_cfg, gen_flags);
      const auto g = sttest::cmd_generate(cfg, std::cerr);
      std::cout << g.suite_path.string() << "\n";
      return 0;
    }
    if (run->parsed()) return report_exit(sttest::cmd_run(resolve(run, run_cfg, run_flags), std::cerr));
    if (pipe->parsed()) return report_exit({sttest::cmd_pipeline(resolve(pipe, pipe_cfg, pipe_flags), std::cerr)});
  } catch (const sttest::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.hint().empty()) std::cerr << "hint: " << e.hint() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
