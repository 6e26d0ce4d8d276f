#include "mantis/lang/ast.hpp"

namespace mantis::lang {

std::string to_string(BaseType b) {
  switch (b) {
  case BaseType::Void: return "void";
  case BaseType::Int: return "int";
  case BaseType::Float: return "float";
  case BaseType::Bool: return "bool";
  }
  return "?";
}

std::string to_string(Type t) {
  return t.is_array ? to_string(t.base) + "[]" : to_string(t.base);
}

const char *to_string(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "!"; }

const char *to_string(BinaryOp op) {
  switch (op) {
  case BinaryOp::Add: return "+";
  case BinaryOp::Sub: return "-";
  case BinaryOp::Mul: return "*";
  case BinaryOp::Div: return "/";
  case BinaryOp::Mod: return "%";
  case BinaryOp::Lt: return "<";
  case BinaryOp::Le: return "<=";
  case BinaryOp::Gt: return ">";
  case BinaryOp::Ge: return ">=";
  case BinaryOp::Eq: return "==";
  case BinaryOp::Ne: return "!=";
  case BinaryOp::And: return "&&";
  case BinaryOp::Or: return "||";
  }
  return "?";
}

const char *to_string(Builtin b) {
  switch (b) {
  case Builtin::Read: return "read";
  case Builtin::ReadInt: return "readInt";
  case Builtin::Eof: return "eof";
  case Builtin::Len: return "len";
  case Builtin::ToInt: return "toInt";
  case Builtin::ToFloat: return "toFloat";
  }
  return "?";
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->loc = loc;
  e->id = id;
  e->int_value = int_value;
  e->float_value = float_value;
  e->bool_value = bool_value;
  e->name = name;
  e->unary_op = unary_op;
  e->binary_op = binary_op;
  e->builtin = builtin;
  e->elem_type = elem_type;
  e->operands.reserve(operands.size());
  for (const auto &op : operands)
    e->operands.push_back(op->clone());
  e->var = var;
  e->callee = callee;
  e->type = type;
  return e;
}

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->loc = loc;
  s->id = id;
  s->probe = probe;
  s->probe_site = probe_site;
  s->name = name;
  s->decl_type = decl_type;
  s->var = var;
  if (index) s->index = index->clone();
  if (value) s->value = value->clone();
  if (value2) s->value2 = value2->clone();
  s->body = clone_block(body);
  s->else_body = clone_block(else_body);
  s->has_else = has_else;
  return s;
}

Block clone_block(const Block &b) {
  Block out;
  out.reserve(b.size());
  for (const auto &s : b)
    out.push_back(s->clone());
  return out;
}

FunctionDef::FunctionDef(const FunctionDef &other)
    : name(other.name), params(other.params), return_type(other.return_type),
      body(clone_block(other.body)), loc(other.loc),
      slot_types(other.slot_types), slot_names(other.slot_names),
      slot_decl_stmt(other.slot_decl_stmt) {}

FunctionDef &FunctionDef::operator=(const FunctionDef &other) {
  if (this != &other) {
    FunctionDef copy(other);
    *this = std::move(copy);
  }
  return *this;
}

namespace {

ExprPtr make_expr(ExprKind kind, SourceLoc loc) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->loc = loc;
  return e;
}

} // namespace

ExprPtr make_int(std::int64_t v, SourceLoc loc) {
  auto e = make_expr(ExprKind::IntLit, loc);
  e->int_value = v;
  return e;
}

ExprPtr make_float(double v, SourceLoc loc) {
  auto e = make_expr(ExprKind::FloatLit, loc);
  e->float_value = v;
  return e;
}

ExprPtr make_bool(bool v, SourceLoc loc) {
  auto e = make_expr(ExprKind::BoolLit, loc);
  e->bool_value = v;
  return e;
}

ExprPtr make_var(std::string name, SourceLoc loc) {
  auto e = make_expr(ExprKind::Var, loc);
  e->name = std::move(name);
  return e;
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceLoc loc) {
  auto e = make_expr(ExprKind::Unary, loc);
  e->unary_op = op;
  e->operands.push_back(std::move(operand));
  return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r, SourceLoc loc) {
  auto e = make_expr(ExprKind::Binary, loc);
  e->binary_op = op;
  e->operands.push_back(std::move(l));
  e->operands.push_back(std::move(r));
  return e;
}

StmtPtr make_assign(std::string name, ExprPtr value, SourceLoc loc) {
  auto s = std::make_unique<Stmt>();
  s->kind = StmtKind::Assign;
  s->loc = loc;
  s->name = std::move(name);
  s->value = std::move(value);
  return s;
}

int Program::find_function(const std::string &name) const {
  for (std::size_t i = 0; i < functions.size(); ++i)
    if (functions[i].name == name) return static_cast<int>(i);
  return -1;
}

int Program::find_global(const std::string &name) const {
  for (std::size_t i = 0; i < globals.size(); ++i)
    if (globals[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

struct Numberer {
  int next = 0;
  int next_probe = 0;

  void expr(Expr &e) {
    e.id = next++;
    for (auto &op : e.operands)
      expr(*op);
  }

  void block(Block &b, bool inside_probe) {
    for (auto &s : b)
      stmt(*s, inside_probe);
  }

  void stmt(Stmt &s, bool inside_probe) {
    s.id = next++;
    s.probe_site = -1;
    if (s.probe && !inside_probe) s.probe_site = next_probe++;
    if (inside_probe) s.probe = true;
    const bool nested = inside_probe || s.probe;
    if (s.index) expr(*s.index);
    if (s.value) expr(*s.value);
    if (s.value2) expr(*s.value2);
    block(s.body, nested);
    block(s.else_body, nested);
  }
};

} // namespace

void renumber(Program &program) {
  Numberer n;
  for (auto &g : program.globals)
    g.id = n.next++;
  for (auto &f : program.functions)
    n.block(f.body, false);
  program.node_count = n.next;
  program.probe_site_count = n.next_probe;
}

} // namespace mantis::lang
