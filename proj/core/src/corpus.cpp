#include "sttest/corpus.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

#ifndef STTEST_CORPUS_DIR
#define STTEST_CORPUS_DIR "corpus"
#endif
#ifndef STTEST_INSTALLED_CORPUS_DIR
#define STTEST_INSTALLED_CORPUS_DIR STTEST_CORPUS_DIR
#endif

namespace sttest {

const std::vector<CorpusEntry>& corpus_entries() {
  static const std::vector<CorpusEntry> entries = [] {
    std::vector<CorpusEntry> e = {
        {"ACCUMULATOR", "counter", "state across calls; early RETURN", "running sum with reset"},
        {"ALARM_LATCH", "alarm handling", "state; falling edge trigger", "latching alarm with acknowledge"},
        {"DEC_TO_HEX", "conversion", "strings; negative inputs", "decimal to hexadecimal string"},
        {"GEN_SIN", "signal generation", "timers (PLC clock); REAL outputs", "sine wave generator"},
        {"LAMBERT_W", "mathematics", "REAL tolerance; loops", "Lambert W by Newton iteration"},
        {"ON_DELAY", "timer", "timers (expiry needs dwell cycles)", "on-delay wrapper around TON"},
        {"PI_CTRL", "closed-loop control", "state; timers (elapsed time); saturation", "PI controller with anti-windup"},
        {"TRAFFIC_CTRL", "sequence control", "state; timers (multi-second phases)", "traffic light with two pedestrian buttons"},
        {"UPDOWN_COUNTER", "counter", "state; rising edges; limits", "bounded up/down counter"},
    };
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return e;
  }();
  return entries;
}

std::filesystem::path corpus_block_file(const std::filesystem::path& root, std::string_view name) {
  return root / "blocks" / (std::string(name) + ".st");
}

std::filesystem::path default_corpus_dir() {
  if (const char* env = std::getenv("STTEST_CORPUS_DIR"); env != nullptr && *env != '\0') return env;
  if (std::filesystem::is_directory(STTEST_CORPUS_DIR)) return STTEST_CORPUS_DIR;
  return STTEST_INSTALLED_CORPUS_DIR;
}

std::string render_corpus_list(const std::filesystem::path& root) {
  std::size_t wn = 4, wc = 8, wh = 9;
  for (const auto& e : corpus_entries()) {
    wn = std::max(wn, e.name.size());
    wc = std::max(wc, e.category.size());
    wh = std::max(wh, e.challenge.size());
  }
  std::string out = fmt::format("{:<{}}  {:<{}}  {:<{}}  {}\n", "name", wn, "category", wc, "challenge", wh, "source");
  for (const auto& e : corpus_entries()) {
    out += fmt::format("{:<{}}  {:<{}}  {:<{}}  {}\n", e.name, wn, e.category, wc, e.challenge, wh,
                       corpus_block_file(root, e.name).string());
  }
  return out;
}

}  // namespace sttest
