#include "sttest/diagnostic.hpp"

#include <sstream>

namespace sttest {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Lex: return "lex";
    case Phase::Parse: return "parse";
    case Phase::Resolve: return "resolve";
  }
  return "?";
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics,
                               const std::string& origin) {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    out << (origin.empty() ? "<input>" : origin) << ':' << d.span.begin.line << ':'
        << d.span.begin.column << ": " << phase_name(d.phase) << " error: " << d.message;
    if (!d.hint.empty()) out << " (" << d.hint << ')';
    out << '\n';
  }
  return out.str();
}

CompileError::CompileError(Phase phase, std::vector<Diagnostic> diagnostics, std::string origin)
    : std::runtime_error(format_diagnostics(diagnostics, origin)),
      phase_(phase),
      diagnostics_(std::move(diagnostics)),
      origin_(std::move(origin)) {}

}  // namespace sttest
