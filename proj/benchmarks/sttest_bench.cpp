#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "sttest/coverage.hpp"
#include "sttest/llm.hpp"
#include "sttest/runner.hpp"
#include "sttest/runtime.hpp"

using namespace sttest;

namespace {

std::string read(const std::string& rel) {
  std::ifstream in(std::string(STTEST_SOURCE_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SourceUnit block(const std::string& name) {
  return SourceUnit(read("corpus/blocks/" + name + ".st"), name + ".st");
}

void BM_Compile(benchmark::State& state) {
  const SourceUnit src = block("TRAFFIC_CTRL");
  for (auto _ : state) benchmark::DoNotOptimize(compile(src));
}
BENCHMARK(BM_Compile);

void BM_ScanCycle(benchmark::State& state) {
  auto prog = compile(block("UPDOWN_COUNTER"));
  FbInstance inst = instantiate(*prog, "UPDOWN_COUNTER");
  SimClock clock{0, 10};
  bool up = false;
  for (auto _ : state) {
    up = !up;
    benchmark::DoNotOptimize(execute_cycle(inst, {{"UP", Value::boolean(up)}}, clock));
  }
}
BENCHMARK(BM_ScanCycle);

void BM_RunSuite(benchmark::State& state) {
  const SourceUnit src = block("DEC_TO_HEX");
  auto unit = compile(src);
  const CheckedSuite suite = validate(parse_suite(read("corpus/suites/dec_to_hex_boundary.csv")), *unit);
  for (auto _ : state) benchmark::DoNotOptimize(run_suite(src, {}, suite, {}));
}
BENCHMARK(BM_RunSuite)->Unit(benchmark::kMillisecond);

void BM_TimerSuite(benchmark::State& state) {
  const SourceUnit src = block("ON_DELAY");
  auto unit = compile(src);
  const CheckedSuite suite = validate(parse_suite(read("corpus/suites/on_delay_expiry.csv")), *unit);
  RunSettings s;
  s.harness.cycle_time_ms = 50;
  for (auto _ : state) benchmark::DoNotOptimize(run_suite(src, {}, suite, s));
}
BENCHMARK(BM_TimerSuite)->Unit(benchmark::kMillisecond);

void BM_ExtractCsv(benchmark::State& state) {
  const std::string response = read("corpus/fixtures/UPDOWN_COUNTER.enhanced.txt");
  for (auto _ : state) benchmark::DoNotOptimize(extract_csv(response));
}
BENCHMARK(BM_ExtractCsv);

void BM_BuildPrompt(benchmark::State& state) {
  const std::string text = read("corpus/blocks/DEC_TO_HEX.st");
  auto prog = compile(SourceUnit(text, "DEC_TO_HEX.st"));
  const auto summary = InterfaceSummary::of(*prog->find_pou("DEC_TO_HEX"));
  for (auto _ : state) benchmark::DoNotOptimize(build_prompt(text, summary, PromptMode::Enhanced));
}
BENCHMARK(BM_BuildPrompt);

}  // namespace

BENCHMARK_MAIN();
