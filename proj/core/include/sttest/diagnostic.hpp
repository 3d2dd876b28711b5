#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sttest/source.hpp"

namespace sttest {

enum class Phase { Lex, Parse, Resolve };

struct Diagnostic {
  Phase phase = Phase::Parse;
  std::string message;
  Span span;
  std::string hint;  // e.g. expected-token list; may be empty
};

std::string_view phase_name(Phase phase);

/// "origin:line:col: phase error: message [hint]" per diagnostic, one per line.
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics,
                               const std::string& origin);

/// Thrown by the frontend with every diagnostic collected in a pass.
class CompileError : public std::runtime_error {
 public:
  CompileError(Phase phase, std::vector<Diagnostic> diagnostics, std::string origin = {});

  Phase phase() const { return phase_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const std::string& origin() const { return origin_; }

 private:
  Phase phase_;
  std::vector<Diagnostic> diagnostics_;
  std::string origin_;
};

}  // namespace sttest
