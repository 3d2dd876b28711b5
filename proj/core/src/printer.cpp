#include "sttest/printer.hpp"

#include <sstream>

namespace sttest {

namespace {

std::string_view binary_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return "OR";
    case BinaryOp::Xor: return "XOR";
    case BinaryOp::And: return "AND";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "MOD";
    case BinaryOp::Pow: return "**";
  }
  return "?";
}

std::string literal_text(const Expr& e) {
  switch (e.literal_kind) {
    case LiteralKind::Bool: return e.bool_value ? "TRUE" : "FALSE";
    case LiteralKind::Int: return std::to_string(e.int_value);
    case LiteralKind::Real: return format_real_literal(e.real_value);
    case LiteralKind::Time: return format_time_literal(e.int_value);
    case LiteralKind::String: return quote_st_string(e.string_value);
  }
  return "?";
}

std::string type_spec_text(const TypeSpec& t) {
  std::string s;
  if (t.array_bounds) {
    s = "ARRAY[" + std::to_string(t.array_bounds->first) + ".." +
        std::to_string(t.array_bounds->second) + "] OF ";
  }
  s += t.name;
  if (t.string_length) s += "(" + std::to_string(*t.string_length) + ")";
  return s;
}

class Printer {
 public:
  std::string run(const Ast& ast) {
    for (const auto& pou : ast.pous) {
      pou_(pou);
      out_ << '\n';
    }
    for (const auto& config : ast.configurations) {
      configuration(config);
      out_ << '\n';
    }
    return out_.str();
  }

 private:
  void line(int depth, const std::string& text) { out_ << std::string(depth * 4, ' ') << text << '\n'; }

  void pou_(const PouDecl& pou) {
    std::string head = std::string(pou_keyword(pou.kind)) + " " + pou.name;
    if (pou.return_type) head += " : " + type_spec_text(*pou.return_type);
    line(0, head);
    for (const auto& section : pou.sections) {
      std::string kw(section_keyword(section.kind));
      if (section.constant) kw += " CONSTANT";
      if (section.retain) kw += " RETAIN";
      line(0, kw);
      for (const auto& v : section.vars) {
        std::string text = v.name + " : " + type_spec_text(v.type);
        if (v.init) {
          text += " := " + print_expr(*v.init);
        } else if (!v.init_list.empty()) {
          text += " := [";
          for (std::size_t i = 0; i < v.init_list.size(); ++i) {
            if (i) text += ", ";
            text += print_expr(*v.init_list[i]);
          }
          text += "]";
        }
        line(1, text + ";");
      }
      line(0, "END_VAR");
    }
    statements(pou.body, 0);
    line(0, "END_" + std::string(pou_keyword(pou.kind)));
  }

  void configuration(const ConfigurationDecl& config) {
    line(0, "CONFIGURATION " + config.name);
    for (const auto& res : config.resources) {
      const bool named = !res.name.empty();
      const int depth = named ? 2 : 1;
      if (named) line(1, "RESOURCE " + res.name + (res.target.empty() ? "" : " ON " + res.target));
      for (const auto& t : res.tasks) {
        line(depth, "TASK " + t.name + "(INTERVAL := " + format_time_literal(t.interval_ms) +
                        ", PRIORITY := " + std::to_string(t.priority) + ");");
      }
      for (const auto& p : res.programs) {
        line(depth, "PROGRAM " + p.instance + (p.task.empty() ? "" : " WITH " + p.task) + " : " +
                        p.type + ";");
      }
      if (named) line(1, "END_RESOURCE");
    }
    line(0, "END_CONFIGURATION");
  }

  void statements(const StmtList& list, int depth) {
    for (const auto& s : list) statement(*s, depth);
  }

  void statement(const Stmt& s, int depth) {
    switch (s.kind) {
      case StmtKind::Assign:
        line(depth, print_expr(*s.target) + " := " + print_expr(*s.value) + ";");
        break;
      case StmtKind::Call:
        line(depth, print_expr(*s.value) + ";");
        break;
      case StmtKind::Exit: line(depth, "EXIT;"); break;
      case StmtKind::Return: line(depth, "RETURN;"); break;
      case StmtKind::If:
        for (std::size_t i = 0; i < s.branches.size(); ++i) {
          line(depth, std::string(i == 0 ? "IF " : "ELSIF ") + print_expr(*s.branches[i].condition) + " THEN");
          statements(s.branches[i].body, depth + 1);
        }
        if (s.has_else) {
          line(depth, "ELSE");
          statements(s.else_body, depth + 1);
        }
        line(depth, "END_IF;");
        break;
      case StmtKind::Case:
        line(depth, "CASE " + print_expr(*s.value) + " OF");
        for (const auto& branch : s.cases) {
          std::string labels;
          for (std::size_t i = 0; i < branch.labels.size(); ++i) {
            if (i) labels += ", ";
            labels += std::to_string(branch.labels[i].lower);
            if (branch.labels[i].upper != branch.labels[i].lower)
              labels += ".." + std::to_string(branch.labels[i].upper);
          }
          line(depth + 1, labels + ":");
          statements(branch.body, depth + 2);
        }
        if (s.has_else) {
          line(depth + 1, "ELSE");
          statements(s.else_body, depth + 2);
        }
        line(depth, "END_CASE;");
        break;
      case StmtKind::For: {
        std::string head = "FOR " + print_expr(*s.target) + " := " + print_expr(*s.from) + " TO " +
                           print_expr(*s.to);
        if (s.by) head += " BY " + print_expr(*s.by);
        line(depth, head + " DO");
        statements(s.body, depth + 1);
        line(depth, "END_FOR;");
        break;
      }
      case StmtKind::While:
        line(depth, "WHILE " + print_expr(*s.value) + " DO");
        statements(s.body, depth + 1);
        line(depth, "END_WHILE;");
        break;
      case StmtKind::Repeat:
        line(depth, "REPEAT");
        statements(s.body, depth + 1);
        line(depth, "UNTIL " + print_expr(*s.value));
        line(depth, "END_REPEAT;");
        break;
    }
  }

  std::ostringstream out_;
};

// -- dump -------------------------------------------------------------------

class Dumper {
 public:
  std::string run(const Ast& ast) {
    out_ << "(unit " << ast.statement_count;
    for (const auto& pou : ast.pous) pou_(pou);
    for (const auto& c : ast.configurations) {
      out_ << " (configuration " << c.name;
      for (const auto& r : c.resources) {
        out_ << " (resource " << r.name << ' ' << r.target;
        for (const auto& t : r.tasks) out_ << " (task " << t.name << ' ' << t.interval_ms << ' ' << t.priority << ')';
        for (const auto& p : r.programs) out_ << " (program " << p.instance << ' ' << p.task << ' ' << p.type << ')';
        out_ << ')';
      }
      out_ << ')';
    }
    out_ << ')';
    return out_.str();
  }

 private:
  void pou_(const PouDecl& pou) {
    out_ << " (" << pou_keyword(pou.kind) << ' ' << pou.name;
    if (pou.return_type) out_ << " :" << type_spec_text(*pou.return_type);
    for (const auto& section : pou.sections) {
      out_ << " (" << section_keyword(section.kind) << (section.constant ? " CONSTANT" : "")
           << (section.retain ? " RETAIN" : "");
      for (const auto& v : section.vars) {
        out_ << " (var " << v.name << ' ' << type_spec_text(v.type);
        if (v.init) expr(*v.init);
        for (const auto& e : v.init_list) expr(*e);
        out_ << ')';
      }
      out_ << ')';
    }
    list(pou.body);
    out_ << ')';
  }

  void list(const StmtList& stmts) {
    out_ << " (";
    for (const auto& s : stmts) stmt(*s);
    out_ << ')';
  }

  void stmt(const Stmt& s) {
    out_ << " (#" << s.id << ' ';
    switch (s.kind) {
      case StmtKind::Assign:
        out_ << ":=";
        expr(*s.target);
        expr(*s.value);
        break;
      case StmtKind::Call:
        out_ << "call";
        expr(*s.value);
        break;
      case StmtKind::Exit: out_ << "exit"; break;
      case StmtKind::Return: out_ << "return"; break;
      case StmtKind::If:
        out_ << "if";
        for (const auto& b : s.branches) {
          out_ << " (guard #" << b.guard_id;
          expr(*b.condition);
          list(b.body);
          out_ << ')';
        }
        if (s.has_else) {
          out_ << " else";
          list(s.else_body);
        }
        break;
      case StmtKind::Case:
        out_ << "case";
        expr(*s.value);
        for (const auto& b : s.cases) {
          out_ << " (";
          for (const auto& l : b.labels) out_ << l.lower << ".." << l.upper << ' ';
          list(b.body);
          out_ << ')';
        }
        if (s.has_else) {
          out_ << " else";
          list(s.else_body);
        }
        break;
      case StmtKind::For:
        out_ << "for";
        expr(*s.target);
        expr(*s.from);
        expr(*s.to);
        if (s.by) expr(*s.by);
        list(s.body);
        break;
      case StmtKind::While:
        out_ << "while";
        expr(*s.value);
        list(s.body);
        break;
      case StmtKind::Repeat:
        out_ << "repeat";
        list(s.body);
        expr(*s.value);
        break;
    }
    out_ << ')';
  }

  void expr(const Expr& e) {
    out_ << " (";
    switch (e.kind) {
      case ExprKind::Literal: out_ << "lit " << literal_text(e); break;
      case ExprKind::Name: out_ << "name " << e.name; break;
      case ExprKind::Member: out_ << "member " << e.name; break;
      case ExprKind::Index: out_ << "index"; break;
      case ExprKind::Unary: out_ << "unary " << static_cast<int>(e.unary_op); break;
      case ExprKind::Binary: out_ << "binary " << binary_text(e.binary_op); break;
      case ExprKind::Call: out_ << "call " << e.name; break;
      case ExprKind::Convert: out_ << "convert"; break;
    }
    if (e.type.kind != TypeKind::Void) out_ << " :" << type_name(e.type);
    for (const auto& op : e.operands) expr(*op);
    for (const auto& a : e.args) {
      out_ << " (arg " << a.name << (a.output ? " =>" : "");
      expr(*a.value);
      out_ << ')';
    }
    out_ << ')';
  }

  std::ostringstream out_;
};

int precedence(const Expr& e) {
  if (e.kind == ExprKind::Unary) return 8;
  if (e.kind != ExprKind::Binary) return 10;
  switch (e.binary_op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::Xor: return 2;
    case BinaryOp::And: return 3;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 4;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 5;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 6;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 7;
    case BinaryOp::Pow: return 9;
  }
  return 10;
}

}  // namespace

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Literal: {
      // negative numeric literals only arise from folding; keep them atomic
      std::string text = literal_text(e);
      if (!text.empty() && text[0] == '-') return "(" + text + ")";
      return text;
    }
    case ExprKind::Name: return e.name;
    case ExprKind::Member: return print_expr(*e.operands[0]) + "." + e.name;
    case ExprKind::Index: return print_expr(*e.operands[0]) + "[" + print_expr(*e.operands[1]) + "]";
    case ExprKind::Convert: return print_expr(*e.operands[0]);
    case ExprKind::Unary: {
      const Expr& operand = *e.operands[0];
      std::string inner = print_expr(operand);
      if (precedence(operand) < precedence(e)) inner = "(" + inner + ")";
      switch (e.unary_op) {
        case UnaryOp::Neg: return "-" + inner;
        case UnaryOp::Plus: return "+" + inner;
        case UnaryOp::Not: return "NOT " + inner;
      }
      return inner;
    }
    case ExprKind::Binary: {
      const int p = precedence(e);
      std::string lhs = print_expr(*e.operands[0]);
      std::string rhs = print_expr(*e.operands[1]);
      // left-associative: parenthesize a right operand of equal precedence
      if (precedence(*e.operands[0]) < p) lhs = "(" + lhs + ")";
      if (precedence(*e.operands[1]) <= p) rhs = "(" + rhs + ")";
      return lhs + " " + std::string(binary_text(e.binary_op)) + " " + rhs;
    }
    case ExprKind::Call: {
      std::string s = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        if (!e.args[i].name.empty()) s += e.args[i].name + (e.args[i].output ? " => " : " := ");
        s += print_expr(*e.args[i].value);
      }
      return s + ")";
    }
  }
  return "?";
}

std::string print(const Ast& ast) { return Printer().run(ast); }
std::string dump(const Ast& ast) { return Dumper().run(ast); }

}  // namespace sttest
