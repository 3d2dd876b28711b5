#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sttest/llm.hpp"
#include "sttest/runner.hpp"

namespace sttest {

enum class Command { Generate, Run, Pipeline };

struct RunConfig {
  std::string unit;
  std::vector<std::string> libs;
  std::string fb;  // empty: last FUNCTION_BLOCK of the unit
  PromptMode mode = PromptMode::Enhanced;
  ProviderConfig provider;
  std::int64_t cycle_time_ms = 10;
  double atol = 1e-6;
  double rtol = 1e-6;
  std::string out = "runs";
  std::vector<std::string> suites;  // run: one or more suite files
  std::string label;                // run directory name under `out`
  std::string prompts_dir;          // overrides for the prompt templates
  std::uint64_t max_scans = 100000;
  int jobs = 1;
  bool fixed_clock = false;

  /// Throws std::invalid_argument.
  void validate(Command cmd) const;
  std::filesystem::path run_dir() const;
};

/// `key = value` lines; `#` starts a comment, values may be double-quoted.
/// `lib` and `suite` append. Throws std::invalid_argument naming the line.
void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& origin = "config");
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

struct GenerateResult {
  std::filesystem::path run_dir;
  std::filesystem::path suite_path;
  std::size_t cases = 0;
  std::vector<std::string> warnings;
};

struct RunResult {
  std::filesystem::path run_dir;
  TestReport report;
  int exit_code = 0;  // 0 all passed, 1 failures or faults
};

/// Prompt, query, extraction and validation; writes prompt.txt,
/// exchange_<n>.json and suite.csv. Throws PipelineError.
GenerateResult cmd_generate(const RunConfig& cfg, std::ostream& log);

/// One result per suite; several suites run on up to `jobs` threads, each
/// in `<run_dir>/<suite stem>`. Throws PipelineError.
std::vector<RunResult> cmd_run(const RunConfig& cfg, std::ostream& log);

/// cmd_generate then cmd_run on the generated suite, in one directory.
RunResult cmd_pipeline(const RunConfig& cfg, std::ostream& log);

std::string cmd_corpus_list(const std::filesystem::path& corpus_dir);

}  // namespace sttest
