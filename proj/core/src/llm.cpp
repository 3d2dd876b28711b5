#include "sttest/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "sttest/csv.hpp"
#include "sttest/testspec.hpp"
#include "sttest_prompts.hpp"

namespace sttest {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  const std::string needle = fmt::format("*** {} ***", key);
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + value.size())) {
    text.replace(pos, needle.size(), value);
  }
  return text;
}

std::string with_newline(std::string text) {
  if (!text.empty() && text.back() != '\n') text.push_back('\n');
  return text;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string var_list(const std::vector<InterfaceVar>& vars, std::string_view prefix) {
  if (vars.empty()) return "(none)";
  std::string out;
  for (const auto& v : vars) {
    if (!out.empty()) out += ", ";
    out += fmt::format("{}{} ({})", prefix, v.name, type_name(v.type));
  }
  return out;
}

}  // namespace

std::string_view mode_name(PromptMode mode) {
  return mode == PromptMode::Simple ? "simple" : "enhanced";
}

PromptMode parse_mode(std::string_view text) {
  const std::string m = lower(text);
  if (m == "simple") return PromptMode::Simple;
  if (m == "enhanced") return PromptMode::Enhanced;
  throw std::invalid_argument(fmt::format("unknown prompt mode '{}' (simple|enhanced)", text));
}

InterfaceSummary InterfaceSummary::of(const PouInfo& fb) {
  InterfaceSummary s;
  s.fb_name = fb.name;
  for (auto& v : interface_of(fb)) {
    if (v.section == Section::Input) s.inputs.push_back(v);
    else if (v.section == Section::Output) s.outputs.push_back(v);
  }
  return s;
}

std::string InterfaceSummary::header() const {
  std::string h = "test_name,state,dwell_cycles";
  for (const auto& v : inputs) h += "," + v.name;
  for (const auto& v : outputs) h += fmt::format(",{}{}", kExpectPrefix, v.name);
  return h;
}

PromptTemplates PromptTemplates::defaults() {
  using namespace embedded;
  return {std::string(kPromptBase),      std::string(kPromptCoverage), std::string(kPromptBoundary),
          std::string(kPromptReference), std::string(kPromptFormat),   std::string(kPromptCode)};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  const std::pair<const char*, std::string*> files[] = {
      {"base.txt", &t.base},
      {"enhanced_coverage.txt", &t.coverage_goal},
      {"enhanced_boundary.txt", &t.boundary_values},
      {"enhanced_reference.txt", &t.reference_functions},
      {"format_spec.txt", &t.format_spec},
      {"code.txt", &t.code},
  };
  for (auto [name, slot] : files) {
    if (std::filesystem::exists(dir / name)) *slot = read_file(dir / name);
  }
  return t;
}

std::vector<std::string> PromptTemplates::enhanced_groups() const {
  return {with_newline(coverage_goal), with_newline(boundary_values), with_newline(reference_functions)};
}

std::string PromptBundle::full() const { return instructions + "\n" + format_spec + "\n" + code; }

PromptBundle build_prompt(std::string_view fb_source, const InterfaceSummary& summary, PromptMode mode,
                          std::int64_t cycle_time_ms, const PromptTemplates& templates) {
  if (fb_source.empty()) throw std::invalid_argument("empty function block source");
  PromptBundle b;
  b.mode = mode;
  b.instructions = with_newline(replace_all(templates.base, "FB_NAME", summary.fb_name));
  if (mode == PromptMode::Enhanced) {
    for (const auto& g : templates.enhanced_groups()) b.instructions += g;
  }
  std::string f = templates.format_spec;
  f = replace_all(f, "HEADER", summary.header());
  f = replace_all(f, "INPUTS", var_list(summary.inputs, ""));
  f = replace_all(f, "OUTPUTS", var_list(summary.outputs, kExpectPrefix));
  f = replace_all(f, "CYCLE_TIME_MS", std::to_string(cycle_time_ms));
  f = replace_all(f, "FB_NAME", summary.fb_name);
  b.format_spec = with_newline(f);
  b.code = with_newline(replace_all(templates.code, "SOURCE", with_newline(std::string(fb_source))));
  return b;
}

void ProviderConfig::validate() const {
  if (provider != "mock" && provider != "http")
    throw std::invalid_argument(fmt::format("unknown provider '{}' (mock|http)", provider));
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw std::invalid_argument(fmt::format("temperature {} outside [0,2]", temperature));
  if (timeout_ms <= 0) throw std::invalid_argument("timeout must be positive");
  if (max_tokens <= 0) throw std::invalid_argument("max tokens must be positive");
  if (attempts < 1) throw std::invalid_argument("attempts must be at least 1");
  if (backoff_ms < 0) throw std::invalid_argument("backoff must not be negative");
}

std::string LlmExchange::to_json() const {
  ordered_json j;
  j["schema"] = 1;
  j["provider"] = provider;
  j["model"] = model;
  j["latency_ms"] = latency_ms;
  j["attempts"] = attempts;
  j["prompt_tokens"] = prompt_tokens ? ordered_json(*prompt_tokens) : ordered_json(nullptr);
  j["completion_tokens"] = completion_tokens ? ordered_json(*completion_tokens) : ordered_json(nullptr);
  j["prompt"] = prompt;
  j["response"] = response;
  return j.dump(2) + "\n";
}

LlmExchange LlmExchange::from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  LlmExchange e;
  e.provider = j.at("provider").get<std::string>();
  e.model = j.at("model").get<std::string>();
  e.latency_ms = j.at("latency_ms").get<std::int64_t>();
  e.attempts = j.at("attempts").get<int>();
  if (!j.at("prompt_tokens").is_null()) e.prompt_tokens = j["prompt_tokens"].get<std::int64_t>();
  if (!j.at("completion_tokens").is_null()) e.completion_tokens = j["completion_tokens"].get<std::int64_t>();
  e.prompt = j.at("prompt").get<std::string>();
  e.response = j.at("response").get<std::string>();
  return e;
}

MockProvider::MockProvider(std::filesystem::path fixture, bool fixed_clock)
    : fixture_(std::move(fixture)), fixed_clock_(fixed_clock) {}

LlmExchange MockProvider::complete(const std::string& prompt) {
  const auto start = std::chrono::steady_clock::now();
  LlmExchange e;
  e.provider = id();
  e.model = "fixture:" + fixture_.filename().string();
  e.prompt = prompt;
  try {
    e.response = read_file(fixture_);
  } catch (const std::runtime_error& err) {
    throw TransportError(fmt::format("mock fixture: {}", err.what()));
  }
  if (!fixed_clock_) {
    e.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  }
  return e;
}

HttpProvider::HttpProvider(ProviderConfig cfg, HttpTransport transport,
                           std::function<void(std::int64_t)> sleep_ms)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), sleep_ms_(std::move(sleep_ms)) {
  cfg_.validate();
  if (!sleep_ms_) {
    sleep_ms_ = [](std::int64_t ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
  }
}

LlmExchange HttpProvider::complete(const std::string& prompt) {
  const char* key = std::getenv(cfg_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw AuthError(fmt::format("API key variable {} is not set", cfg_.api_key_env));

  ordered_json body;
  body[cfg_.model_field] = cfg_.model;
  body[cfg_.messages_field] = ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = cfg_.temperature;
  body["max_tokens"] = cfg_.max_tokens;

  HttpRequest req;
  req.url = cfg_.endpoint;
  req.headers["Authorization"] = std::string("Bearer ") + key;
  req.headers["Content-Type"] = "application/json";
  req.body = body.dump();
  req.timeout_ms = cfg_.timeout_ms;

  const auto start = std::chrono::steady_clock::now();
  enum class Last { Timeout, RateLimit, Transport } last = Last::Transport;
  std::string detail;
  for (int attempt = 1; attempt <= cfg_.attempts; ++attempt) {
    if (attempt > 1) sleep_ms_(cfg_.backoff_ms << (attempt - 2));
    const HttpResponse res = transport_(req);
    if (res.failure == HttpResponse::Failure::Timeout) {
      last = Last::Timeout;
      detail = res.error;
      continue;
    }
    if (res.failure == HttpResponse::Failure::Connection) {
      last = Last::Transport;
      detail = res.error;
      continue;
    }
    if (res.status == 401 || res.status == 403)
      throw AuthError(fmt::format("HTTP {} from {}", res.status, cfg_.endpoint));
    if (res.status == 429) {
      last = Last::RateLimit;
      detail = "HTTP 429";
      continue;
    }
    if (res.status >= 500) {
      last = Last::Transport;
      detail = fmt::format("HTTP {}", res.status);
      continue;
    }
    if (res.status < 200 || res.status >= 300)
      throw TransportError(fmt::format("HTTP {} from {}: {}", res.status, cfg_.endpoint, res.body));

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res.body);
    } catch (const nlohmann::json::exception& err) {
      throw TransportError(fmt::format("response is not JSON: {}", err.what()));
    }
    const auto content = nlohmann::json::json_pointer(cfg_.content_path);
    if (!j.contains(content) || !j[content].is_string())
      throw TransportError(fmt::format("response has no string at {}", cfg_.content_path));

    LlmExchange e;
    e.provider = id();
    e.model = cfg_.model;
    e.prompt = prompt;
    e.response = j[content].get<std::string>();
    e.attempts = attempt;
    for (auto [path, slot] : {std::pair{&cfg_.prompt_tokens_path, &e.prompt_tokens},
                              std::pair{&cfg_.completion_tokens_path, &e.completion_tokens}}) {
      const auto p = nlohmann::json::json_pointer(*path);
      if (j.contains(p) && j[p].is_number_integer()) *slot = j[p].get<std::int64_t>();
    }
    e.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    return e;
  }
  const std::string msg = fmt::format("{} after {} attempts: {}", cfg_.endpoint, cfg_.attempts, detail);
  switch (last) {
    case Last::Timeout: throw TimeoutError(msg);
    case Last::RateLimit: throw RateLimitError(msg);
    case Last::Transport: break;
  }
  throw TransportError(msg);
}

std::unique_ptr<LlmProvider> make_provider(const ProviderConfig& cfg, bool fixed_clock) {
  cfg.validate();
  if (cfg.provider == "mock") {
    if (cfg.fixture.empty()) throw std::invalid_argument("mock provider needs a fixture file");
    return std::make_unique<MockProvider>(cfg.fixture, fixed_clock);
  }
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw AuthError(fmt::format("API key variable {} is not set", cfg.api_key_env));
  return std::make_unique<HttpProvider>(cfg);
}

ExchangeLog::ExchangeLog(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ExchangeLog::write(const LlmExchange& exchange) {
  std::lock_guard lock(mutex_);
  auto path = dir_ / fmt::format("exchange_{}.json", next_++);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << exchange.to_json();
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return path;
}

LlmExchange query(LlmProvider& provider, const PromptBundle& bundle, ExchangeLog* log) {
  LlmExchange e = provider.complete(bundle.full());
  if (log != nullptr) log->write(e);
  return e;
}

LlmExchange query(const ProviderConfig& cfg, const PromptBundle& bundle, ExchangeLog* log,
                  bool fixed_clock) {
  auto provider = make_provider(cfg, fixed_clock);
  return query(*provider, bundle, log);
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Field count of a single-record line, or 0.
std::size_t record_width(const std::string& line) {
  if (line.empty()) return 0;
  try {
    auto rows = read_csv(line);
    return rows.size() == 1 ? rows[0].fields.size() : 0;
  } catch (const CsvError&) {
    return 0;
  }
}

bool is_header(const std::string& line) {
  try {
    auto rows = read_csv(line);
    if (rows.size() != 1 || rows[0].fields.size() < 3) return false;
    return lower(trim(rows[0].fields[0])) == "test_name" && lower(trim(rows[0].fields[1])) == "state";
  } catch (const CsvError&) {
    return false;
  }
}

// Longest header + rows run; empty when none has a data row.
std::vector<std::string> best_run(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
  std::vector<std::string> best;
  for (std::size_t i = from; i < to; ++i) {
    const std::string head = trim(lines[i]);
    if (!is_header(head)) continue;
    const std::size_t width = record_width(head);
    std::vector<std::string> run{head};
    std::size_t j = i + 1;
    for (; j < to; ++j) {
      std::string row = trim(lines[j]);
      if (is_header(row) || record_width(row) != width) break;
      run.push_back(std::move(row));
    }
    if (run.size() > 1 && run.size() > best.size()) best = std::move(run);
    i = j - 1;
  }
  return best;
}

bool is_fence(const std::string& line) { return trim(line).rfind("```", 0) == 0; }

std::string join(const std::vector<std::string>& run) {
  std::string out;
  for (const auto& l : run) out += l + "\n";
  return out;
}

}  // namespace

std::string extract_csv(std::string_view raw) {
  const auto lines = split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    std::size_t end = i + 1;
    while (end < lines.size() && !is_fence(lines[end])) ++end;
    if (end == lines.size()) break;  // unclosed: fall back to the plain scan
    auto run = best_run(lines, i + 1, end);
    if (!run.empty()) return join(run);
    i = end;
  }
  auto run = best_run(lines, 0, lines.size());
  if (run.empty()) throw NoCsvFound("response contains no CSV table with a test_name,state,... header");
  return join(run);
}

}  // namespace sttest
