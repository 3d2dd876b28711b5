#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sttest/program.hpp"

namespace sttest {

enum class PromptMode { Simple, Enhanced };

std::string_view mode_name(PromptMode mode);
/// "simple" or "enhanced"; throws std::invalid_argument.
PromptMode parse_mode(std::string_view text);

/// Columns the LLM has to produce for one function block.
struct InterfaceSummary {
  std::string fb_name;
  std::vector<InterfaceVar> inputs;
  std::vector<InterfaceVar> outputs;

  static InterfaceSummary of(const PouInfo& fb);
  /// `test_name,state,dwell_cycles,<inputs>,expect_<outputs>`
  std::string header() const;
};

/// Editable prompt text. Placeholders look like `*** NAME ***`.
struct PromptTemplates {
  std::string base;
  std::string coverage_goal;
  std::string boundary_values;
  std::string reference_functions;
  std::string format_spec;
  std::string code;

  static PromptTemplates defaults();
  /// Reads base.txt, enhanced_coverage.txt, enhanced_boundary.txt,
  /// enhanced_reference.txt, format_spec.txt and code.txt; missing files
  /// keep the default.
  static PromptTemplates load(const std::filesystem::path& dir);
  /// The three enhanced instruction groups, in prompt order.
  std::vector<std::string> enhanced_groups() const;
};

struct PromptBundle {
  PromptMode mode = PromptMode::Simple;
  std::string instructions;
  std::string format_spec;
  std::string code;

  std::string full() const;
};

/// Throws std::invalid_argument for an empty source.
PromptBundle build_prompt(std::string_view fb_source, const InterfaceSummary& summary, PromptMode mode,
                          std::int64_t cycle_time_ms = 10,
                          const PromptTemplates& templates = PromptTemplates::defaults());

struct ProviderConfig {
  std::string provider = "mock";  // "mock" or "http"
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4-0613";
  double temperature = 0.0;
  std::int64_t max_tokens = 4096;
  std::string api_key_env = "OPENAI_API_KEY";
  std::int64_t timeout_ms = 120000;
  std::string fixture;  // mock: response file
  // request field names and JSON pointers into the response
  std::string model_field = "model";
  std::string messages_field = "messages";
  std::string content_path = "/choices/0/message/content";
  std::string prompt_tokens_path = "/usage/prompt_tokens";
  std::string completion_tokens_path = "/usage/completion_tokens";
  int attempts = 3;
  std::int64_t backoff_ms = 1000;  // doubled after each failed attempt

  /// Throws std::invalid_argument.
  void validate() const;
};

struct LlmExchange {
  std::string provider;
  std::string model;
  std::string prompt;
  std::string response;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
  std::int64_t latency_ms = 0;
  int attempts = 1;

  std::string to_json() const;
  static LlmExchange from_json(std::string_view text);
};

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class AuthError : public LlmError {
 public:
  using LlmError::LlmError;
};
class TimeoutError : public LlmError {
 public:
  using LlmError::LlmError;
};
class RateLimitError : public LlmError {
 public:
  using LlmError::LlmError;
};
class TransportError : public LlmError {
 public:
  using LlmError::LlmError;
};
class NoCsvFound : public LlmError {
 public:
  using LlmError::LlmError;
};

struct HttpRequest {
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
  std::int64_t timeout_ms = 0;
};

struct HttpResponse {
  enum class Failure { None, Timeout, Connection };
  Failure failure = Failure::None;
  int status = 0;
  std::string body;
  std::string error;  // set with a failure
};

using HttpTransport = std::function<HttpResponse(const HttpRequest&)>;

/// Blocking POST through cpp-httplib.
HttpResponse http_post(const HttpRequest& request);

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string id() const = 0;
  virtual LlmExchange complete(const std::string& prompt) = 0;
};

/// Returns the fixture file verbatim.
class MockProvider : public LlmProvider {
 public:
  explicit MockProvider(std::filesystem::path fixture, bool fixed_clock = false);
  std::string id() const override { return "mock"; }
  LlmExchange complete(const std::string& prompt) override;

 private:
  std::filesystem::path fixture_;
  bool fixed_clock_;
};

/// JSON chat-completion client. Retries 429, 5xx, timeouts and connection
/// failures with exponential backoff.
class HttpProvider : public LlmProvider {
 public:
  explicit HttpProvider(ProviderConfig cfg, HttpTransport transport = http_post,
                        std::function<void(std::int64_t)> sleep_ms = {});
  std::string id() const override { return "http"; }
  LlmExchange complete(const std::string& prompt) override;

 private:
  ProviderConfig cfg_;
  HttpTransport transport_;
  std::function<void(std::int64_t)> sleep_ms_;
};

/// Throws AuthError when a remote provider's key variable is unset.
std::unique_ptr<LlmProvider> make_provider(const ProviderConfig& cfg, bool fixed_clock = false);

/// Writes exchange_<n>.json files, numbered from 1, one writer at a time.
class ExchangeLog {
 public:
  explicit ExchangeLog(std::filesystem::path dir);
  std::filesystem::path write(const LlmExchange& exchange);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  int next_ = 1;
};

/// Sends the full prompt; the exchange goes to `log` when given.
LlmExchange query(const ProviderConfig& cfg, const PromptBundle& bundle, ExchangeLog* log = nullptr,
                  bool fixed_clock = false);
LlmExchange query(LlmProvider& provider, const PromptBundle& bundle, ExchangeLog* log = nullptr);

/// CSV payload of a response: the first fenced block that holds a suite
/// header, else the longest header + rows run of lines. Rows keep the
/// header's field count. Throws NoCsvFound.
std::string extract_csv(std::string_view raw);

}  // namespace sttest
