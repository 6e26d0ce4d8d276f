#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mantis::lang {

enum class BaseType : std::uint8_t { Void, Int, Float, Bool };

struct Type {
  BaseType base = BaseType::Void;
  bool is_array = false;

  static constexpr Type scalar(BaseType b) { return Type{b, false}; }
  static constexpr Type array_of(BaseType b) { return Type{b, true}; }

  bool is_void() const { return base == BaseType::Void; }
  bool is_scalar() const { return !is_array && base != BaseType::Void; }
  bool is_numeric() const {
    return !is_array && (base == BaseType::Int || base == BaseType::Float);
  }

  friend bool operator==(const Type &, const Type &) = default;
};

std::string to_string(BaseType b);
std::string to_string(Type t);

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class ExprKind : std::uint8_t {
  IntLit,
  FloatLit,
  BoolLit,
  Var,
  Index,    // name[operands[0]]
  Unary,    // op operands[0]
  Binary,   // operands[0] op operands[1]
  Call,     // name(operands...)
  Builtin,  // builtin(operands...)
  NewArray, // new elem_type[operands[0]]
};

enum class UnaryOp : std::uint8_t { Neg, Not };

enum class BinaryOp : std::uint8_t {
  Add, Sub, Mul, Div, Mod,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
};

enum class Builtin : std::uint8_t { Read, ReadInt, Eof, Len, ToInt, ToFloat };

const char *to_string(UnaryOp op);
const char *to_string(BinaryOp op);
const char *to_string(Builtin b);

enum class VarScope : std::uint8_t { Unresolved, Local, Global };

// Resolved variable: a function-local slot (parameters first) or a global.
struct VarRef {
  VarScope scope = VarScope::Unresolved;
  int index = -1;

  friend bool operator==(const VarRef &, const VarRef &) = default;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourceLoc loc;
  int id = -1;

  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;
  std::string name;
  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  Builtin builtin = Builtin::Read;
  BaseType elem_type = BaseType::Int;
  std::vector<ExprPtr> operands;

  // Filled in by check().
  VarRef var;
  int callee = -1;
  Type type;

  ExprPtr clone() const;
};

ExprPtr make_int(std::int64_t v, SourceLoc loc = {});
ExprPtr make_float(double v, SourceLoc loc = {});
ExprPtr make_bool(bool v, SourceLoc loc = {});
ExprPtr make_var(std::string name, SourceLoc loc = {});
ExprPtr make_unary(UnaryOp op, ExprPtr e, SourceLoc loc = {});
ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r, SourceLoc loc = {});

enum class StmtKind : std::uint8_t {
  VarDecl,  // decl_type name (= value)?
  Assign,   // name (\[index\])? = value
  If,       // if (value) body else else_body
  While,    // while (value) body
  For,      // for name in value .. value2 body
  ExprStmt, // value;
  Return,   // return value?;
  Print,
  Work,
  Fail,
  Try,      // try body rescue else_body
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  SourceLoc loc;
  int id = -1;
  // Instrumentation statements execute at zero cost.
  bool probe = false;
  // Pre-order ordinal among top-level probe statements, -1 otherwise.
  int probe_site = -1;

  std::string name;
  Type decl_type;
  VarRef var;
  ExprPtr index;
  ExprPtr value;
  ExprPtr value2;
  Block body;
  Block else_body;
  bool has_else = false;

  StmtPtr clone() const;
};

Block clone_block(const Block &b);

StmtPtr make_assign(std::string name, ExprPtr value, SourceLoc loc = {});

struct Param {
  std::string name;
  Type type;
  SourceLoc loc;
};

struct FunctionDef {
  std::string name;
  std::vector<Param> params;
  Type return_type;
  Block body;
  SourceLoc loc;

  // Filled in by check(): one slot per parameter, then one per local
  // declaration (including for-loop variables) in pre-order.
  std::vector<Type> slot_types;
  std::vector<std::string> slot_names;
  std::vector<int> slot_decl_stmt;

  FunctionDef() = default;
  FunctionDef(const FunctionDef &other);
  FunctionDef &operator=(const FunctionDef &other);
  FunctionDef(FunctionDef &&) = default;
  FunctionDef &operator=(FunctionDef &&) = default;
};

struct Literal {
  BaseType type = BaseType::Int;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;
};

struct GlobalDecl {
  std::string name;
  Type type;
  std::int64_t array_size = 0;
  std::optional<Literal> init;
  SourceLoc loc;
  // Unique node id; for arrays this is also the allocation site.
  int id = -1;
};

struct Program {
  std::vector<GlobalDecl> globals;
  std::vector<FunctionDef> functions;
  std::string entry = "main";

  int find_function(const std::string &name) const;
  int find_global(const std::string &name) const;

  // Number of ids handed out by renumber(); ids lie in [0, node_count).
  int node_count = 0;
  int probe_site_count = 0;
};

// Assigns fresh pre-order ids to every global, statement and expression and
// numbers probe sites. Called by check().
void renumber(Program &program);

// Pre-order visitation helpers.
template <typename F> void for_each_stmt(const Block &block, F &&f);
template <typename F> void for_each_stmt(Block &block, F &&f);

template <typename F> void for_each_expr(const Expr &e, F &&f) {
  f(e);
  for (const auto &op : e.operands)
    for_each_expr(*op, f);
}

template <typename F> void for_each_stmt_expr(const Stmt &s, F &&f) {
  if (s.index) for_each_expr(*s.index, f);
  if (s.value) for_each_expr(*s.value, f);
  if (s.value2) for_each_expr(*s.value2, f);
}

template <typename F> void for_each_stmt(const Block &block, F &&f) {
  for (const auto &s : block) {
    f(*s);
    for_each_stmt(s->body, f);
    for_each_stmt(s->else_body, f);
  }
}

template <typename F> void for_each_stmt(Block &block, F &&f) {
  for (auto &s : block) {
    f(*s);
    for_each_stmt(s->body, f);
    for_each_stmt(s->else_body, f);
  }
}

} // namespace mantis::lang
