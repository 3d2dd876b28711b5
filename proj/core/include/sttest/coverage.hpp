#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sttest/program.hpp"
#include "sttest/runtime.hpp"
#include "sttest/source.hpp"

namespace sttest {

class ForeignStatement : public std::invalid_argument {
 public:
  ForeignStatement(const std::string& pou, StatementId id);
};

/// Per-POU statement hit counts. Every statement of a registered POU is
/// present, zero-hit ones included.
class CoverageMap {
 public:
  using Counts = std::map<StatementId, std::uint64_t>;

  CoverageMap() = default;
  /// Domain = every POU declared in `prog` (libraries and built-ins excluded).
  static CoverageMap for_unit(const TypedProgram& prog);

  void add_pou(const PouInfo& pou);
  bool contains(std::string_view pou) const { return pous_.count(std::string(pou)) != 0; }

  /// Adds one hit per trace entry. Throws ForeignStatement.
  void accumulate(const ExecTrace& trace);
  void merge(const CoverageMap& other);
  /// Overwrites one count. Throws ForeignStatement.
  void set(std::string_view pou, StatementId id, std::uint64_t count);

  const std::map<std::string, Counts>& pous() const { return pous_; }
  const Counts& counts(std::string_view pou) const;
  std::uint64_t count(std::string_view pou, StatementId id) const;

  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;

 private:
  std::map<std::string, Counts> pous_;
};

CoverageMap accumulate(CoverageMap map, const ExecTrace& trace);

/// Carries counts of POUs present in both programs across to `to`'s ids,
/// matching statements by position within the POU.
CoverageMap rebase(const CoverageMap& map, const TypedProgram& from, const TypedProgram& to);

struct PouCoverage {
  std::string pou;
  std::uint64_t total = 0;
  std::uint64_t hit = 0;
  /// Percentage in hundredths, rounded half-up (7000 = 70.00%).
  std::int64_t centi_percent = 0;

  double percentage() const { return static_cast<double>(centi_percent) / 100.0; }
  std::string percent_text() const;  // "70.00"
};

struct CoverageSummary {
  std::vector<PouCoverage> pous;  // map order
  /// Unit under test plus the unit's POUs it uses.
  PouCoverage aggregate;
  std::vector<std::string> aggregate_pous;
};

/// Percentage of `hit` over `total`; an empty POU counts as fully covered.
std::int64_t centi_percent(std::uint64_t hit, std::uint64_t total);

/// Throws UnknownPou when `unit_under_test` is not declared in `prog`.
CoverageSummary summarize(const CoverageMap& map, const TypedProgram& prog, std::string_view unit_under_test);

/// Per-line hit counts (max over statements whose site starts on the line),
/// for the POUs of `prog` in the map.
std::map<std::size_t, std::uint64_t> line_counts(const CoverageMap& map, const TypedProgram& prog);

/// gcov-style listing: `<count|#####|->:<line>:<text>`.
std::string render_annotated(const CoverageMap& map, const TypedProgram& prog, const SourceUnit& src);

/// LCOV tracefile record for `src`.
std::string render_lcov(const CoverageMap& map, const TypedProgram& prog, const SourceUnit& src);

}  // namespace sttest
