#include "mantis/lang/printer.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "mantis/error.hpp"

namespace mantis::lang {

std::string format_float(double v) {
  if (!std::isfinite(v)) throw InternalError("cannot print non-finite literal");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

int precedence(BinaryOp op) {
  switch (op) {
  case BinaryOp::Or: return 1;
  case BinaryOp::And: return 2;
  case BinaryOp::Eq:
  case BinaryOp::Ne: return 3;
  case BinaryOp::Lt:
  case BinaryOp::Le:
  case BinaryOp::Gt:
  case BinaryOp::Ge: return 4;
  case BinaryOp::Add:
  case BinaryOp::Sub: return 5;
  default: return 6;
  }
}

void print_expr(std::ostream &os, const Expr &e);

void print_args(std::ostream &os, const Expr &e) {
  os << '(';
  for (std::size_t i = 0; i < e.operands.size(); ++i) {
    if (i) os << ", ";
    print_expr(os, *e.operands[i]);
  }
  os << ')';
}

bool is_negative_literal(const Expr &e) {
  return (e.kind == ExprKind::IntLit && e.int_value < 0) ||
         (e.kind == ExprKind::FloatLit && std::signbit(e.float_value));
}

void print_operand(std::ostream &os, const Expr &e, int min_prec) {
  const bool paren = (e.kind == ExprKind::Binary && precedence(e.binary_op) < min_prec) ||
                     is_negative_literal(e);
  if (paren) os << '(';
  print_expr(os, e);
  if (paren) os << ')';
}

void print_expr(std::ostream &os, const Expr &e) {
  switch (e.kind) {
  case ExprKind::IntLit: os << e.int_value; return;
  case ExprKind::FloatLit: os << format_float(e.float_value); return;
  case ExprKind::BoolLit: os << (e.bool_value ? "true" : "false"); return;
  case ExprKind::Var: os << e.name; return;
  case ExprKind::Index:
    os << e.name << '[';
    print_expr(os, *e.operands[0]);
    os << ']';
    return;
  case ExprKind::Unary: {
    os << to_string(e.unary_op);
    const Expr &x = *e.operands[0];
    const bool paren = x.kind == ExprKind::Binary || x.kind == ExprKind::Unary ||
                       is_negative_literal(x);
    if (paren) os << '(';
    print_expr(os, x);
    if (paren) os << ')';
    return;
  }
  case ExprKind::Binary: {
    const int p = precedence(e.binary_op);
    print_operand(os, *e.operands[0], p);
    os << ' ' << to_string(e.binary_op) << ' ';
    print_operand(os, *e.operands[1], p + 1);
    return;
  }
  case ExprKind::Call:
    os << e.name;
    print_args(os, e);
    return;
  case ExprKind::Builtin:
    os << to_string(e.builtin);
    print_args(os, e);
    return;
  case ExprKind::NewArray:
    os << "new " << to_string(e.elem_type) << '[';
    print_expr(os, *e.operands[0]);
    os << ']';
    return;
  }
}

class Printer {
public:
  explicit Printer(std::ostream &os) : os_(os) {}

  void program(const Program &p) {
    for (const auto &g : p.globals) {
      os_ << "global " << to_string(g.type.base);
      if (g.type.is_array) {
        os_ << '[' << g.array_size << "] " << g.name << ";\n";
        continue;
      }
      os_ << ' ' << g.name;
      if (g.init) {
        os_ << " = ";
        switch (g.init->type) {
        case BaseType::Int: os_ << g.init->int_value; break;
        case BaseType::Float: os_ << format_float(g.init->float_value); break;
        case BaseType::Bool: os_ << (g.init->bool_value ? "true" : "false"); break;
        case BaseType::Void: break;
        }
      }
      os_ << ";\n";
    }
    for (const auto &f : p.functions) {
      if (!p.globals.empty() || &f != &p.functions.front()) os_ << '\n';
      function(f);
    }
  }

private:
  std::ostream &os_;
  int depth_ = 0;

  void indent() {
    for (int i = 0; i < depth_; ++i)
      os_ << "  ";
  }

  void function(const FunctionDef &f) {
    os_ << "fn " << f.name << '(';
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) os_ << ", ";
      os_ << to_string(f.params[i].type) << ' ' << f.params[i].name;
    }
    os_ << ')';
    if (!f.return_type.is_void()) os_ << " -> " << to_string(f.return_type);
    os_ << ' ';
    block(f.body);
    os_ << '\n';
  }

  void block(const Block &b) {
    os_ << "{\n";
    ++depth_;
    for (const auto &s : b)
      stmt(*s, false);
    --depth_;
    indent();
    os_ << '}';
  }

  void stmt(const Stmt &s, bool inside_probe) {
    indent();
    if (s.probe && !inside_probe) os_ << "@probe ";
    body_of(s, inside_probe || s.probe);
  }

  void nested_block(const Block &b, bool inside_probe) {
    os_ << "{\n";
    ++depth_;
    for (const auto &s : b)
      stmt(*s, inside_probe);
    --depth_;
    indent();
    os_ << '}';
  }

  void body_of(const Stmt &s, bool probe) {
    switch (s.kind) {
    case StmtKind::VarDecl:
      os_ << to_string(s.decl_type) << ' ' << s.name;
      if (s.value) {
        os_ << " = ";
        print_expr(os_, *s.value);
      }
      os_ << ";\n";
      return;
    case StmtKind::Assign:
      os_ << s.name;
      if (s.index) {
        os_ << '[';
        print_expr(os_, *s.index);
        os_ << ']';
      }
      os_ << " = ";
      print_expr(os_, *s.value);
      os_ << ";\n";
      return;
    case StmtKind::If:
      os_ << "if (";
      print_expr(os_, *s.value);
      os_ << ") ";
      nested_block(s.body, probe);
      if (s.has_else) {
        os_ << " else ";
        nested_block(s.else_body, probe);
      }
      os_ << '\n';
      return;
    case StmtKind::While:
      os_ << "while (";
      print_expr(os_, *s.value);
      os_ << ") ";
      nested_block(s.body, probe);
      os_ << '\n';
      return;
    case StmtKind::For:
      os_ << "for " << s.name << " in ";
      print_expr(os_, *s.value);
      os_ << " .. ";
      print_expr(os_, *s.value2);
      os_ << ' ';
      nested_block(s.body, probe);
      os_ << '\n';
      return;
    case StmtKind::ExprStmt:
      print_expr(os_, *s.value);
      os_ << ";\n";
      return;
    case StmtKind::Return:
      os_ << "return";
      if (s.value) {
        os_ << ' ';
        print_expr(os_, *s.value);
      }
      os_ << ";\n";
      return;
    case StmtKind::Print:
    case StmtKind::Work:
    case StmtKind::Fail:
      os_ << (s.kind == StmtKind::Print ? "print(" : s.kind == StmtKind::Work ? "work(" : "fail(");
      print_expr(os_, *s.value);
      os_ << ");\n";
      return;
    case StmtKind::Try:
      os_ << "try ";
      nested_block(s.body, probe);
      os_ << " rescue ";
      nested_block(s.else_body, probe);
      os_ << '\n';
      return;
    }
  }
};

} // namespace

std::string to_source(const Program &program) {
  std::ostringstream os;
  Printer(os).program(program);
  return os.str();
}

std::string to_source(const Expr &e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

} // namespace mantis::lang
