#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "sttest/app.hpp"
#include "sttest/corpus.hpp"

using namespace sttest;
namespace fs = std::filesystem;

namespace {

const std::string kRoot = testkit::source_dir();

fs::path fresh(const std::string& name) {
  auto d = fs::temp_directory_path() / ("sttest_cli_" + name);
  fs::remove_all(d);
  return d;
}

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome sh(const std::string& args) {
  const std::string cmd = "cd " + kRoot + " && " + STTEST_CLI + " " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) o.out.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) { return testkit::read_text(p.string()); }

RunConfig mock_cfg(const std::string& block, const std::string& fixture, const fs::path& out) {
  RunConfig c;
  c.unit = kRoot + "/corpus/blocks/" + block + ".st";
  c.provider.fixture = kRoot + "/corpus/fixtures/" + fixture;
  c.out = out.string();
  c.fixed_clock = true;
  return c;
}

}  // namespace

TEST(Config, FileValuesAndErrors) {
  RunConfig c;
  apply_config_text(c,
                    "# run settings\n[run]\nunit = \"a.st\"\nlib = l1.st\nlib = l2.st\nmode = simple\n"
                    "cycle_time_ms = 50  # slow task\natol = 0.001\nfixed_clock = true\n"
                    "[provider]\nprovider = http\ntemperature = 0.5\n");
  EXPECT_EQ(c.unit, "a.st");
  EXPECT_EQ(c.libs, (std::vector<std::string>{"l1.st", "l2.st"}));
  EXPECT_EQ(c.mode, PromptMode::Simple);
  EXPECT_EQ(c.cycle_time_ms, 50);
  EXPECT_DOUBLE_EQ(c.atol, 0.001);
  EXPECT_TRUE(c.fixed_clock);
  EXPECT_EQ(c.provider.provider, "http");
  EXPECT_DOUBLE_EQ(c.provider.temperature, 0.5);
  EXPECT_THROW(apply_config_text(c, "colour = blue\n"), std::invalid_argument);
  EXPECT_THROW(apply_config_text(c, "cycle_time_ms = fast\n"), std::invalid_argument);
  EXPECT_THROW(apply_config_text(c, "just words\n"), std::invalid_argument);
}

TEST(Config, Validation) {
  RunConfig c;
  c.unit = "x.st";
  EXPECT_THROW(c.validate(Command::Run), std::invalid_argument);  // no suite
  c.suites = {"s.csv"};
  EXPECT_NO_THROW(c.validate(Command::Run));
  EXPECT_THROW(c.validate(Command::Pipeline), std::invalid_argument);  // suite and generation
  c.suites.clear();
  EXPECT_THROW(c.validate(Command::Generate), std::invalid_argument);  // mock without fixture
  c.provider.fixture = "f.txt";
  EXPECT_NO_THROW(c.validate(Command::Generate));
  c.cycle_time_ms = 0;
  EXPECT_THROW(c.validate(Command::Generate), std::invalid_argument);
}

TEST(Commands, GenerateWritesSuite) {
  const auto dir = fresh("generate");
  std::ostringstream log;
  const auto g = cmd_generate(mock_cfg("DEC_TO_HEX", "DEC_TO_HEX.enhanced.txt", dir), log);
  EXPECT_EQ(g.cases, 6u);
  EXPECT_EQ(g.suite_path, dir / "suite.csv");
  EXPECT_EQ(slurp(g.suite_path).rfind("test_name,state,dwell_cycles,DE,expect_HEX\n", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "exchange_1.json"));
  EXPECT_TRUE(fs::exists(dir / "prompt.txt"));
  EXPECT_NE(log.str().find("6 test cases"), std::string::npos);
}

TEST(Commands, UnknownColumnIsDroppedWithWarning) {
  const auto dir = fresh("unknown");
  std::ostringstream log;
  const auto r = cmd_pipeline(mock_cfg("DEC_TO_HEX", "DEC_TO_HEX.unknown_column.txt", dir), log);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report.run.dropped_columns, (std::vector<std::string>{"expect_OVERFLOW"}));
  ASSERT_EQ(r.report.run.warnings.size(), 1u);
  EXPECT_NE(slurp(dir / "report.json").find("expect_OVERFLOW"), std::string::npos);
}

TEST(Commands, NoCsvKeepsTheExchange) {
  const auto dir = fresh("nocsv");
  std::ostringstream log;
  try {
    cmd_generate(mock_cfg("DEC_TO_HEX", "no_csv.txt", dir), log);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.phase(), PipelinePhase::Generate);
    EXPECT_NE(e.hint().find("exchange_1.json"), std::string::npos);
  }
  const auto ex = LlmExchange::from_json(slurp(dir / "exchange_1.json"));
  EXPECT_EQ(ex.response, slurp(kRoot + "/corpus/fixtures/no_csv.txt"));
}

TEST(Commands, PipelineArtifactsAreComplete) {
  const auto dir = fresh("complete");
  std::ostringstream log;
  cmd_pipeline(mock_cfg("UPDOWN_COUNTER", "UPDOWN_COUNTER.enhanced.txt", dir), log);
  for (const char* f : {"report.json", "report.txt", "coverage.lcov", "coverage.annotated.txt", "harness.st",
                        "suite.csv", "exchange_1.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
}

TEST(Commands, PipelineEqualsGenerateThenRun) {
  const auto a = fresh("pipe_a");
  const auto b = fresh("pipe_b");
  std::ostringstream log;
  auto cfg = mock_cfg("UPDOWN_COUNTER", "UPDOWN_COUNTER.enhanced.txt", a);
  cmd_pipeline(cfg, log);
  cfg.out = b.string();
  const auto g = cmd_generate(cfg, log);
  auto run_cfg = cfg;
  run_cfg.suites = {g.suite_path.string()};
  cmd_run(run_cfg, log);
  for (const char* f : {"report.json", "report.txt", "coverage.lcov", "coverage.annotated.txt", "harness.st",
                        "suite.csv", "exchange_1.json", "prompt.txt"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Commands, ParallelSuitesGetTheirOwnDirectories) {
  const auto dir = fresh("jobs");
  RunConfig c;
  c.unit = kRoot + "/corpus/blocks/DEC_TO_HEX.st";
  c.suites = {kRoot + "/corpus/suites/dec_to_hex_correct.csv", kRoot + "/corpus/suites/dec_to_hex_boundary.csv"};
  c.out = dir.string();
  c.jobs = 2;
  c.fixed_clock = true;
  std::ostringstream log;
  const auto rs = cmd_run(c, log);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].exit_code, 0);
  EXPECT_EQ(rs[1].exit_code, 1);
  EXPECT_TRUE(fs::exists(dir / "dec_to_hex_correct" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "dec_to_hex_boundary" / "report.json"));
  c.jobs = 1;
  c.out = (dir / "serial").string();
  const auto serial = cmd_run(c, log);
  EXPECT_EQ(slurp(dir / "serial" / "dec_to_hex_boundary" / "report.json"),
            slurp(dir / "dec_to_hex_boundary" / "report.json"));
}

TEST(Commands, CorpusListing) {
  const auto a = cmd_corpus_list(default_corpus_dir());
  EXPECT_EQ(a, cmd_corpus_list(default_corpus_dir()));
  EXPECT_GE(corpus_entries().size(), 5u);
  for (const auto& e : corpus_entries()) {
    EXPECT_TRUE(fs::exists(corpus_block_file(default_corpus_dir(), e.name))) << e.name;
    EXPECT_NE(a.find(e.name), std::string::npos);
    EXPECT_FALSE(e.challenge.empty());
  }
  for (const char* c : {"state", "timers", "strings"}) EXPECT_NE(a.find(c), std::string::npos) << c;
  EXPECT_EQ(testkit::corpus_block_names().size(), corpus_entries().size());
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh("exit");
  const std::string unit = " --unit corpus/blocks/DEC_TO_HEX.st --out " + dir.string();
  EXPECT_EQ(sh("run" + unit + "/ok --suite corpus/suites/dec_to_hex_correct.csv").code, 0);
  const auto bad = sh("run" + unit + "/neg --suite corpus/suites/dec_to_hex_boundary.csv");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("negative_one      fail"), std::string::npos) << bad.out;
  EXPECT_EQ(sh("run" + unit + "/missing --suite corpus/suites/nope.csv").code, 2);
  EXPECT_EQ(sh("run --suite corpus/suites/dec_to_hex_correct.csv").code, 2);
  EXPECT_EQ(sh("frobnicate").code, 2);
  EXPECT_EQ(sh("--help").code, 0);
}

TEST(Cli, RemoteProviderWithoutKeyFailsAtGenerate) {
  const auto dir = fresh("nokey");
  const auto o = sh("pipeline --unit corpus/blocks/DEC_TO_HEX.st --provider http --api-key-env STTEST_ABSENT_KEY --out " +
                    dir.string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("[generate]"), std::string::npos) << o.out;
}

TEST(Cli, ModesPersistDistinctPrompts) {
  const auto dir = fresh("modes");
  const std::string base = "generate --unit corpus/blocks/DEC_TO_HEX.st --provider mock "
                           "--fixture corpus/fixtures/DEC_TO_HEX.simple.txt --out " + dir.string();
  ASSERT_EQ(sh(base + " --label simple --mode simple").code, 0);
  ASSERT_EQ(sh(base + " --label enhanced --mode enhanced").code, 0);
  EXPECT_NE(slurp(dir / "simple" / "prompt.txt"), slurp(dir / "enhanced" / "prompt.txt"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = fresh("config");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "unit = corpus/blocks/ON_DELAY.st\nsuite = corpus/suites/on_delay_expiry.csv\ncycle_time_ms = 10\n"
        << "out = " << (dir / "runs").string() << "\nfixed_clock = true\n";
  }
  // 10 ms cycles: ten calls only reach 90 ms, so the preset is not reached
  EXPECT_EQ(sh("run --config " + (dir / "run.toml").string()).code, 1);
  EXPECT_EQ(sh("run --config " + (dir / "run.toml").string() + " --cycle-time-ms 50").code, 0);
  EXPECT_NE(slurp(dir / "runs" / "report.json").find("\"cycle_time_ms\": 50"), std::string::npos);
}

TEST(Cli, CorpusListIsStable) {
  const auto a = sh("corpus list");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, sh("corpus list").out);
  EXPECT_EQ(a.out, sh("corpus list").out);
}
