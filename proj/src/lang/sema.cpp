#include "mantis/lang/sema.hpp"

#include <map>
#include <set>

#include "mantis/lang/parser.hpp"

namespace mantis::lang {

std::string to_string(const Diagnostic &d) {
  return std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) +
         ": " + d.message;
}

namespace {

bool assignable(Type to, Type from) {
  if (to == from) return true;
  return !to.is_array && !from.is_array && to.base == BaseType::Float &&
         from.base == BaseType::Int;
}

class Checker {
public:
  explicit Checker(Program &p) : prog_(p) {}

  std::vector<Diagnostic> run() {
    renumber(prog_);
    check_globals();
    check_signatures();
    for (auto &f : prog_.functions)
      check_function(f);
    return std::move(diags_);
  }

private:
  Program &prog_;
  std::vector<Diagnostic> diags_;
  std::map<std::string, int> functions_;
  std::map<std::string, int> globals_;

  FunctionDef *fn_ = nullptr;
  std::vector<std::map<std::string, int>> scopes_;

  void error(SourceLoc loc, std::string msg) {
    diags_.push_back({loc, std::move(msg)});
  }

  void check_globals() {
    for (std::size_t i = 0; i < prog_.globals.size(); ++i) {
      const auto &g = prog_.globals[i];
      if (!globals_.emplace(g.name, static_cast<int>(i)).second)
        error(g.loc, "duplicate global " + g.name);
      if (g.type.is_array && g.array_size < 0)
        error(g.loc, "negative array size for global " + g.name);
      if (g.init) {
        const Type lit = Type::scalar(g.init->type);
        if (!assignable(g.type, lit))
          error(g.loc, "initializer of global " + g.name + " has type " +
                           to_string(lit) + ", expected " + to_string(g.type));
      }
    }
  }

  void check_signatures() {
    for (std::size_t i = 0; i < prog_.functions.size(); ++i) {
      const auto &f = prog_.functions[i];
      if (!functions_.emplace(f.name, static_cast<int>(i)).second)
        error(f.loc, "duplicate function " + f.name);
      std::set<std::string> names;
      for (const auto &p : f.params)
        if (!names.insert(p.name).second)
          error(p.loc, "duplicate parameter " + p.name + " in " + f.name);
    }
    auto it = functions_.find(prog_.entry);
    if (it == functions_.end()) {
      error({1, 1}, "missing function " + prog_.entry);
    } else {
      const auto &m = prog_.functions[it->second];
      if (!m.params.empty())
        error(m.loc, prog_.entry + " must not take parameters");
      if (!m.return_type.is_void())
        error(m.loc, prog_.entry + " must not return a value");
    }
  }

  int declare(const std::string &name, Type t, int decl_stmt, SourceLoc loc) {
    auto &scope = scopes_.back();
    if (scope.count(name))
      error(loc, "redeclaration of " + name);
    const int slot = static_cast<int>(fn_->slot_types.size());
    fn_->slot_types.push_back(t);
    fn_->slot_names.push_back(name);
    fn_->slot_decl_stmt.push_back(decl_stmt);
    scope[name] = slot;
    return slot;
  }

  // Returns the resolved variable and its type, or reports and returns an
  // unresolved ref.
  std::pair<VarRef, Type> lookup(const std::string &name, SourceLoc loc) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end())
        return {{VarScope::Local, f->second}, fn_->slot_types[f->second]};
    }
    auto g = globals_.find(name);
    if (g != globals_.end())
      return {{VarScope::Global, g->second}, prog_.globals[g->second].type};
    error(loc, "undeclared variable " + name);
    return {{}, Type{}};
  }

  void check_function(FunctionDef &f) {
    fn_ = &f;
    f.slot_types.clear();
    f.slot_names.clear();
    f.slot_decl_stmt.clear();
    scopes_.clear();
    scopes_.emplace_back();
    for (const auto &p : f.params)
      declare(p.name, p.type, -1, p.loc);
    block(f.body);
    scopes_.clear();
    fn_ = nullptr;
  }

  void block(Block &b) {
    scopes_.emplace_back();
    for (auto &s : b)
      stmt(*s);
    scopes_.pop_back();
  }

  void expect_type(const Expr &e, Type want, const char *what) {
    if (e.type.is_void() && !e.type.is_array) return; // already reported
    if (!assignable(want, e.type))
      error(e.loc, std::string(what) + " has type " + to_string(e.type) +
                       ", expected " + to_string(want));
  }

  void stmt(Stmt &s) {
    switch (s.kind) {
    case StmtKind::VarDecl: {
      if (s.value) {
        expr(*s.value);
        expect_type(*s.value, s.decl_type, "initializer");
      }
      s.var = {VarScope::Local, declare(s.name, s.decl_type, s.id, s.loc)};
      break;
    }
    case StmtKind::Assign: {
      auto [ref, t] = lookup(s.name, s.loc);
      s.var = ref;
      expr(*s.value);
      if (ref.scope == VarScope::Unresolved) break;
      if (s.index) {
        expr(*s.index);
        if (!t.is_array) {
          error(s.loc, s.name + " is not an array");
          break;
        }
        expect_type(*s.index, Type::scalar(BaseType::Int), "array index");
        expect_type(*s.value, Type::scalar(t.base), "assigned value");
      } else {
        expect_type(*s.value, t, "assigned value");
      }
      break;
    }
    case StmtKind::If:
    case StmtKind::While:
      expr(*s.value);
      expect_type(*s.value, Type::scalar(BaseType::Bool), "condition");
      block(s.body);
      if (s.kind == StmtKind::If) block(s.else_body);
      break;
    case StmtKind::For: {
      expr(*s.value);
      expr(*s.value2);
      expect_type(*s.value, Type::scalar(BaseType::Int), "loop lower bound");
      expect_type(*s.value2, Type::scalar(BaseType::Int), "loop upper bound");
      scopes_.emplace_back();
      s.var = {VarScope::Local,
               declare(s.name, Type::scalar(BaseType::Int), s.id, s.loc)};
      block(s.body);
      scopes_.pop_back();
      break;
    }
    case StmtKind::ExprStmt:
      expr(*s.value, /*allow_void=*/true);
      break;
    case StmtKind::Return:
      if (s.value) {
        expr(*s.value);
        if (fn_->return_type.is_void())
          error(s.loc, "return with a value in void function " + fn_->name);
        else
          expect_type(*s.value, fn_->return_type, "returned value");
      } else if (!fn_->return_type.is_void()) {
        error(s.loc, "missing return value in " + fn_->name);
      }
      break;
    case StmtKind::Print:
      expr(*s.value);
      if (!s.value->type.is_scalar())
        error(s.loc, "print expects a scalar");
      break;
    case StmtKind::Work:
      expr(*s.value);
      if (!s.value->type.is_numeric())
        error(s.loc, "work expects a number");
      break;
    case StmtKind::Fail:
      expr(*s.value);
      expect_type(*s.value, Type::scalar(BaseType::Int), "failure code");
      break;
    case StmtKind::Try:
      block(s.body);
      block(s.else_body);
      break;
    }
  }

  void expr(Expr &e, bool allow_void = false) {
    e.type = Type{};
    switch (e.kind) {
    case ExprKind::IntLit: e.type = Type::scalar(BaseType::Int); return;
    case ExprKind::FloatLit: e.type = Type::scalar(BaseType::Float); return;
    case ExprKind::BoolLit: e.type = Type::scalar(BaseType::Bool); return;
    case ExprKind::Var: {
      auto [ref, t] = lookup(e.name, e.loc);
      e.var = ref;
      e.type = t;
      return;
    }
    case ExprKind::Index: {
      auto [ref, t] = lookup(e.name, e.loc);
      e.var = ref;
      expr(*e.operands[0]);
      expect_type(*e.operands[0], Type::scalar(BaseType::Int), "array index");
      if (ref.scope == VarScope::Unresolved) return;
      if (!t.is_array) {
        error(e.loc, e.name + " is not an array");
        return;
      }
      e.type = Type::scalar(t.base);
      return;
    }
    case ExprKind::Unary: {
      Expr &x = *e.operands[0];
      expr(x);
      if (e.unary_op == UnaryOp::Neg) {
        if (x.type.is_numeric()) e.type = x.type;
        else error(e.loc, "operand of '-' must be a number");
      } else {
        if (x.type == Type::scalar(BaseType::Bool)) e.type = x.type;
        else error(e.loc, "operand of '!' must be bool");
      }
      return;
    }
    case ExprKind::Binary:
      binary(e);
      return;
    case ExprKind::Call:
      call(e, allow_void);
      return;
    case ExprKind::Builtin:
      builtin(e);
      return;
    case ExprKind::NewArray:
      expr(*e.operands[0]);
      expect_type(*e.operands[0], Type::scalar(BaseType::Int), "array length");
      e.type = Type::array_of(e.elem_type);
      return;
    }
  }

  void binary(Expr &e) {
    Expr &l = *e.operands[0];
    Expr &r = *e.operands[1];
    expr(l);
    expr(r);
    const char *op = to_string(e.binary_op);
    const Type boolean = Type::scalar(BaseType::Bool);
    switch (e.binary_op) {
    case BinaryOp::Add:
    case BinaryOp::Sub:
    case BinaryOp::Mul:
    case BinaryOp::Div:
      if (!l.type.is_numeric() || !r.type.is_numeric()) {
        error(e.loc, std::string("operands of '") + op + "' must be numbers");
        return;
      }
      e.type = (l.type.base == BaseType::Float || r.type.base == BaseType::Float)
                   ? Type::scalar(BaseType::Float)
                   : Type::scalar(BaseType::Int);
      return;
    case BinaryOp::Mod:
      if (l.type != Type::scalar(BaseType::Int) ||
          r.type != Type::scalar(BaseType::Int)) {
        error(e.loc, "operands of '%' must be int");
        return;
      }
      e.type = Type::scalar(BaseType::Int);
      return;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
      if (!l.type.is_numeric() || !r.type.is_numeric()) {
        error(e.loc, std::string("operands of '") + op + "' must be numbers");
        return;
      }
      e.type = boolean;
      return;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
      if ((l.type.is_numeric() && r.type.is_numeric()) ||
          (l.type == boolean && r.type == boolean)) {
        e.type = boolean;
      } else {
        error(e.loc, std::string("cannot compare ") + to_string(l.type) +
                         " with " + to_string(r.type));
      }
      return;
    case BinaryOp::And:
    case BinaryOp::Or:
      if (l.type != boolean || r.type != boolean) {
        error(e.loc, std::string("operands of '") + op + "' must be bool");
        return;
      }
      e.type = boolean;
      return;
    }
  }

  void call(Expr &e, bool allow_void) {
    for (auto &a : e.operands)
      expr(*a);
    auto it = functions_.find(e.name);
    if (it == functions_.end()) {
      error(e.loc, "unknown function " + e.name);
      return;
    }
    e.callee = it->second;
    const FunctionDef &f = prog_.functions[it->second];
    if (f.params.size() != e.operands.size()) {
      error(e.loc, "arity mismatch calling " + e.name + ": expected " +
                       std::to_string(f.params.size()) + ", got " +
                       std::to_string(e.operands.size()));
      return;
    }
    for (std::size_t i = 0; i < f.params.size(); ++i)
      expect_type(*e.operands[i], f.params[i].type, "argument");
    if (f.return_type.is_void() && !allow_void)
      error(e.loc, "void function " + e.name + " used as a value");
    e.type = f.return_type;
  }

  void builtin(Expr &e) {
    for (auto &a : e.operands)
      expr(*a);
    auto arity = [&](std::size_t n) {
      if (e.operands.size() == n) return true;
      error(e.loc, "arity mismatch calling " + e.name + ": expected " +
                       std::to_string(n) + ", got " +
                       std::to_string(e.operands.size()));
      return false;
    };
    switch (e.builtin) {
    case Builtin::Read:
      if (arity(0)) e.type = Type::scalar(BaseType::Float);
      return;
    case Builtin::ReadInt:
      if (arity(0)) e.type = Type::scalar(BaseType::Int);
      return;
    case Builtin::Eof:
      if (arity(0)) e.type = Type::scalar(BaseType::Bool);
      return;
    case Builtin::Len:
      if (!arity(1)) return;
      if (!e.operands[0]->type.is_array) {
        error(e.loc, "len expects an array");
        return;
      }
      e.type = Type::scalar(BaseType::Int);
      return;
    case Builtin::ToInt:
    case Builtin::ToFloat:
      if (!arity(1)) return;
      if (!e.operands[0]->type.is_numeric()) {
        error(e.loc, e.name + " expects a number");
        return;
      }
      e.type = Type::scalar(e.builtin == Builtin::ToInt ? BaseType::Int
                                                        : BaseType::Float);
      return;
    }
  }
};

} // namespace

std::vector<Diagnostic> check(Program &program) {
  return Checker(program).run();
}

void check_or_throw(Program &program) {
  auto diags = check(program);
  if (!diags.empty()) throw CheckError(std::move(diags));
}

} // namespace mantis::lang
