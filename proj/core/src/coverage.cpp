#include "sttest/coverage.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

namespace sttest {

ForeignStatement::ForeignStatement(const std::string& pou, StatementId id)
    : std::invalid_argument(fmt::format("statement {} is not in the coverage domain of '{}'", id, pou)) {}

CoverageMap CoverageMap::for_unit(const TypedProgram& prog) {
  CoverageMap map;
  for (const auto& pou : prog.pous()) map.add_pou(*pou);
  return map;
}

void CoverageMap::add_pou(const PouInfo& pou) {
  auto& counts = pous_[pou.name];
  for (StatementId id : pou.statements) counts.emplace(id, 0);
}

void CoverageMap::accumulate(const ExecTrace& trace) {
  // validate first so a foreign id leaves the map untouched
  std::vector<std::uint64_t*> cells;
  cells.reserve(trace.entries.size());
  for (const auto& e : trace.entries) {
    const std::string name = e.pou ? e.pou->name : std::string();
    auto p = pous_.find(name);
    if (p == pous_.end()) throw ForeignStatement(name, e.id);
    auto c = p->second.find(e.id);
    if (c == p->second.end()) throw ForeignStatement(name, e.id);
    cells.push_back(&c->second);
  }
  for (auto* c : cells) ++*c;
}

void CoverageMap::merge(const CoverageMap& other) {
  for (const auto& [pou, counts] : other.pous_) {
    auto& mine = pous_[pou];
    for (const auto& [id, n] : counts) mine[id] += n;
  }
}

void CoverageMap::set(std::string_view pou, StatementId id, std::uint64_t count) {
  auto p = pous_.find(std::string(pou));
  if (p == pous_.end() || !p->second.count(id)) throw ForeignStatement(std::string(pou), id);
  p->second[id] = count;
}

const CoverageMap::Counts& CoverageMap::counts(std::string_view pou) const {
  auto it = pous_.find(std::string(pou));
  if (it == pous_.end()) throw UnknownPou(std::string(pou));
  return it->second;
}

std::uint64_t CoverageMap::count(std::string_view pou, StatementId id) const {
  const auto& c = counts(pou);
  auto it = c.find(id);
  if (it == c.end()) throw ForeignStatement(std::string(pou), id);
  return it->second;
}

CoverageMap accumulate(CoverageMap map, const ExecTrace& trace) {
  map.accumulate(trace);
  return map;
}

CoverageMap rebase(const CoverageMap& map, const TypedProgram& from, const TypedProgram& to) {
  CoverageMap out;
  for (const auto& pou : to.pous()) {
    const PouInfo* src = from.find_local_pou(pou->name);
    if (!src || !map.contains(pou->name) || src->statements.size() != pou->statements.size()) continue;
    out.add_pou(*pou);
    const auto& counts = map.counts(pou->name);
    for (std::size_t i = 0; i < pou->statements.size(); ++i)
      out.set(pou->name, pou->statements[i], counts.at(src->statements[i]));
  }
  return out;
}

std::int64_t centi_percent(std::uint64_t hit, std::uint64_t total) {
  if (total == 0) return 10000;
  // round half up on integers
  return static_cast<std::int64_t>((hit * 20000 + total) / (2 * total));
}

std::string PouCoverage::percent_text() const {
  return fmt::format("{}.{:02}", centi_percent / 100, centi_percent % 100);
}

namespace {

PouCoverage tally(const std::string& name, const CoverageMap::Counts& counts) {
  PouCoverage c;
  c.pou = name;
  c.total = counts.size();
  c.hit = static_cast<std::uint64_t>(
      std::count_if(counts.begin(), counts.end(), [](const auto& kv) { return kv.second > 0; }));
  c.centi_percent = centi_percent(c.hit, c.total);
  return c;
}

void collect_expr(const Expr& e, std::set<const PouInfo*>& out) {
  if (e.kind == ExprKind::Call && e.binding.pou) out.insert(e.binding.pou);
  for (const auto& o : e.operands) collect_expr(*o, out);
  for (const auto& a : e.args) {
    if (a.value) collect_expr(*a.value, out);
  }
}

void collect_stmts(const StmtList& list, std::set<const PouInfo*>& out) {
  for (const auto& s : list) {
    for (const Expr* e : {s->target.get(), s->value.get(), s->from.get(), s->to.get(), s->by.get()}) {
      if (e) collect_expr(*e, out);
    }
    for (const auto& b : s->branches) {
      collect_expr(*b.condition, out);
      collect_stmts(b.body, out);
    }
    for (const auto& c : s->cases) collect_stmts(c.body, out);
    collect_stmts(s->else_body, out);
    collect_stmts(s->body, out);
  }
}

// POUs of the same unit reachable from `root` through calls and instances.
std::vector<const PouInfo*> closure(const PouInfo& root) {
  std::vector<const PouInfo*> order{&root};
  std::set<const PouInfo*> seen{&root};
  for (std::size_t i = 0; i < order.size(); ++i) {
    const PouInfo& p = *order[i];
    std::set<const PouInfo*> next;
    for (const auto& v : p.vars) {
      const Type* t = &v.type;
      while (t->kind == TypeKind::Array && t->element) t = t->element.get();
      if (t->kind == TypeKind::Instance && t->pou) next.insert(t->pou);
    }
    if (p.decl) collect_stmts(p.decl->body, next);
    for (const PouInfo* n : next) {
      if (n->unit == root.unit && seen.insert(n).second) order.push_back(n);
    }
  }
  return order;
}

}  // namespace

CoverageSummary summarize(const CoverageMap& map, const TypedProgram& prog, std::string_view unit_under_test) {
  const PouInfo* uut = prog.find_local_pou(unit_under_test);
  if (!uut) throw UnknownPou(std::string(unit_under_test));
  CoverageSummary s;
  for (const auto& [name, counts] : map.pous()) s.pous.push_back(tally(name, counts));
  s.aggregate.pou = uut->name;
  for (const PouInfo* p : closure(*uut)) {
    if (!map.contains(p->name)) continue;
    const PouCoverage c = tally(p->name, map.counts(p->name));
    s.aggregate.total += c.total;
    s.aggregate.hit += c.hit;
    s.aggregate_pous.push_back(p->name);
  }
  s.aggregate.centi_percent = centi_percent(s.aggregate.hit, s.aggregate.total);
  return s;
}

std::map<std::size_t, std::uint64_t> line_counts(const CoverageMap& map, const TypedProgram& prog) {
  std::map<std::size_t, std::uint64_t> lines;
  for (const auto& [name, counts] : map.pous()) {
    if (!prog.find_local_pou(name)) continue;
    for (const auto& [id, n] : counts) {
      if (id >= prog.statement_count()) continue;
      const std::size_t line = prog.site_of(id).begin.line;
      auto [it, fresh] = lines.emplace(line, n);
      if (!fresh) it->second = std::max(it->second, n);
    }
  }
  return lines;
}

std::string render_annotated(const CoverageMap& map, const TypedProgram& prog, const SourceUnit& src) {
  const auto lines = line_counts(map, prog);
  std::string out = fmt::format("{:>9}:{:>5}:Source:{}\n", "-", 0, src.origin());
  for (std::size_t line = 1; line <= src.line_count(); ++line) {
    const std::string_view text = src.line_text(line);
    if (line == src.line_count() && text.empty()) break;
    auto it = lines.find(line);
    std::string mark = "-";
    if (it != lines.end()) mark = it->second == 0 ? "#####" : std::to_string(it->second);
    out += fmt::format("{:>9}:{:>5}:{}\n", mark, line, text);
  }
  return out;
}

std::string render_lcov(const CoverageMap& map, const TypedProgram& prog, const SourceUnit& src) {
  const auto lines = line_counts(map, prog);
  std::string out = "SF:" + src.origin() + "\n";
  std::size_t hit = 0;
  for (const auto& [line, n] : lines) {
    out += fmt::format("DA:{},{}\n", line, n);
    hit += n > 0;
  }
  out += fmt::format("LF:{}\nLH:{}\nend_of_record\n", lines.size(), hit);
  return out;
}

}  // namespace sttest
