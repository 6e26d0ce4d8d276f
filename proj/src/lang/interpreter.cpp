#include "mantis/lang/interpreter.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mantis/lang/printer.hpp"

namespace mantis::lang {

Value Value::default_of(Type t) {
  if (t.is_array) {
    auto a = std::make_shared<ArrayObject>();
    a->elem = t.base;
    return of_array(std::move(a));
  }
  switch (t.base) {
  case BaseType::Float: return of_float(0.0);
  case BaseType::Bool: return of_bool(false);
  default: return of_int(0);
  }
}

double Value::to_number() const {
  if (is_int()) return static_cast<double>(as_int());
  if (is_float()) return as_float();
  if (is_bool()) return as_bool() ? 1.0 : 0.0;
  return 0.0;
}

std::string Value::to_string() const {
  if (is_int()) return std::to_string(as_int());
  if (is_float()) return format_float(as_float());
  if (is_bool()) return as_bool() ? "true" : "false";
  return "<array>";
}

RuntimeError::RuntimeError(SourceLoc loc, const std::string &message)
    : Error("runtime error at " + std::to_string(loc.line) + ":" +
            std::to_string(loc.column) + ": " + message),
      loc_(loc) {}

InputRecord parse_input(std::string_view text) {
  InputRecord rec;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    double v = 0;
    const char *first = text.data() + i;
    const char *last = text.data() + j;
    if (*first == '+') ++first;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || !std::isfinite(v))
      throw UserError("malformed input value '" + std::string(text.substr(i, j - i)) + "'");
    rec.values.push_back(v);
    i = j;
  }
  return rec;
}

InputRecord read_input_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_input(ss.str());
}

std::string format_input(const InputRecord &input) {
  std::string out;
  for (std::size_t i = 0; i < input.values.size(); ++i) {
    if (i) out += ' ';
    const double v = input.values[i];
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
      out += std::to_string(static_cast<std::int64_t>(v));
    } else {
      out += format_float(v);
    }
  }
  out += '\n';
  return out;
}

namespace {

struct FailSignal {
  std::int64_t code;
};

enum class Flow { Normal, Return };

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

Value coerce(Value v, Type to) {
  if (!to.is_array && to.base == BaseType::Float && v.is_int())
    return Value::of_float(static_cast<double>(v.as_int()));
  return v;
}

class Machine {
public:
  Machine(const Program &p, const InputRecord &in, const CostConfig &cfg)
      : prog_(p), input_(in), cfg_(cfg) {}

  RunResult run() {
    result_.probe_hits.assign(static_cast<std::size_t>(prog_.probe_site_count), 0);
    globals_.reserve(prog_.globals.size());
    for (const auto &g : prog_.globals) {
      if (g.type.is_array) {
        if (g.array_size > kMaxArray)
          throw RuntimeError(g.loc, "array too large");
        auto a = std::make_shared<ArrayObject>();
        a->elem = g.type.base;
        a->items.assign(static_cast<std::size_t>(g.array_size),
                        Value::default_of(Type::scalar(g.type.base)));
        globals_.push_back(Value::of_array(std::move(a)));
      } else if (g.init) {
        Value v;
        switch (g.init->type) {
        case BaseType::Float: v = Value::of_float(g.init->float_value); break;
        case BaseType::Bool: v = Value::of_bool(g.init->bool_value); break;
        default: v = Value::of_int(g.init->int_value); break;
        }
        globals_.push_back(coerce(v, g.type));
      } else {
        globals_.push_back(Value::default_of(g.type));
      }
    }
    const int entry = prog_.find_function(prog_.entry);
    if (entry < 0) throw InternalError("program has no entry function");
    try {
      call(prog_.functions[entry], {}, prog_.functions[entry].loc);
    } catch (const FailSignal &f) {
      result_.trapped = true;
      result_.trap_code = f.code;
    }
    result_.consumed_inputs = cursor_;
    for (std::size_t i = 0; i < prog_.globals.size(); ++i)
      if (!prog_.globals[i].type.is_array)
        result_.globals.emplace(prog_.globals[i].name, globals_[i]);
    return std::move(result_);
  }

private:
  static constexpr std::int64_t kMaxArray = 50'000'000;

  const Program &prog_;
  const InputRecord &input_;
  const CostConfig &cfg_;
  RunResult result_;
  std::vector<Value> globals_;
  std::size_t cursor_ = 0;
  int depth_ = 0;
  int probe_depth_ = 0;

  void charge(std::uint64_t units, SourceLoc loc) {
    if (probe_depth_ > 0) return;
    result_.cost += units;
    if (result_.cost > cfg_.max_cost) throw RuntimeError(loc, "cost budget exceeded");
  }

  Value &slot(std::vector<Value> &frame, VarRef ref) {
    return ref.scope == VarScope::Local ? frame[static_cast<std::size_t>(ref.index)]
                                        : globals_[static_cast<std::size_t>(ref.index)];
  }

  Type type_of(const FunctionDef &f, VarRef ref) const {
    return ref.scope == VarScope::Local ? f.slot_types[static_cast<std::size_t>(ref.index)]
                                        : prog_.globals[static_cast<std::size_t>(ref.index)].type;
  }

  Value call(const FunctionDef &f, std::vector<Value> args, SourceLoc loc) {
    if (++depth_ > cfg_.max_call_depth) throw RuntimeError(loc, "call depth exceeded");
    std::vector<Value> frame(f.slot_types.size());
    for (std::size_t i = 0; i < f.params.size(); ++i)
      frame[i] = coerce(std::move(args[i]), f.params[i].type);
    Value ret = Value::default_of(f.return_type.is_void() ? Type::scalar(BaseType::Int)
                                                          : f.return_type);
    exec_block(f, f.body, frame, ret);
    --depth_;
    return ret;
  }

  Flow exec_block(const FunctionDef &f, const Block &b, std::vector<Value> &frame, Value &ret) {
    for (const auto &s : b)
      if (exec(f, *s, frame, ret) == Flow::Return) return Flow::Return;
    return Flow::Normal;
  }

  Flow exec(const FunctionDef &f, const Stmt &s, std::vector<Value> &frame, Value &ret) {
    if (s.probe_site >= 0) ++result_.probe_hits[static_cast<std::size_t>(s.probe_site)];
    if (s.probe) {
      ++probe_depth_;
      struct Guard {
        int &d;
        ~Guard() { --d; }
      } guard{probe_depth_};
      return exec_inner(f, s, frame, ret);
    }
    return exec_inner(f, s, frame, ret);
  }

  Flow exec_inner(const FunctionDef &f, const Stmt &s, std::vector<Value> &frame, Value &ret) {
    charge(cfg_.statement, s.loc);
    switch (s.kind) {
    case StmtKind::VarDecl: {
      Value v = s.value ? coerce(eval(f, *s.value, frame), s.decl_type)
                        : Value::default_of(s.decl_type);
      slot(frame, s.var) = std::move(v);
      return Flow::Normal;
    }
    case StmtKind::Assign: {
      const Type t = type_of(f, s.var);
      if (s.index) {
        Value arr = slot(frame, s.var);
        const std::int64_t i = eval(f, *s.index, frame).as_int();
        Value v = coerce(eval(f, *s.value, frame), Type::scalar(t.base));
        auto &items = arr.as_array()->items;
        if (i < 0 || static_cast<std::size_t>(i) >= items.size())
          throw RuntimeError(s.loc, "index " + std::to_string(i) + " out of bounds for " + s.name);
        items[static_cast<std::size_t>(i)] = std::move(v);
      } else {
        Value v = coerce(eval(f, *s.value, frame), t);
        slot(frame, s.var) = std::move(v);
      }
      return Flow::Normal;
    }
    case StmtKind::If:
      if (eval(f, *s.value, frame).as_bool()) return exec_block(f, s.body, frame, ret);
      return exec_block(f, s.else_body, frame, ret);
    case StmtKind::While:
      while (eval(f, *s.value, frame).as_bool()) {
        charge(cfg_.loop_iteration, s.loc);
        if (exec_block(f, s.body, frame, ret) == Flow::Return) return Flow::Return;
      }
      return Flow::Normal;
    case StmtKind::For: {
      const std::int64_t lo = eval(f, *s.value, frame).as_int();
      const std::int64_t hi = eval(f, *s.value2, frame).as_int();
      for (std::int64_t i = lo; i < hi; ++i) {
        charge(cfg_.loop_iteration, s.loc);
        slot(frame, s.var) = Value::of_int(i);
        if (exec_block(f, s.body, frame, ret) == Flow::Return) return Flow::Return;
      }
      return Flow::Normal;
    }
    case StmtKind::ExprStmt:
      eval(f, *s.value, frame);
      return Flow::Normal;
    case StmtKind::Return:
      if (s.value) ret = coerce(eval(f, *s.value, frame), f.return_type);
      return Flow::Return;
    case StmtKind::Print:
      result_.outputs.push_back(eval(f, *s.value, frame));
      return Flow::Normal;
    case StmtKind::Work: {
      const Value v = eval(f, *s.value, frame);
      double units = v.is_int() ? static_cast<double>(v.as_int()) : std::trunc(v.as_float());
      if (units > 0) {
        if (units > static_cast<double>(cfg_.max_cost)) throw RuntimeError(s.loc, "cost budget exceeded");
        charge(static_cast<std::uint64_t>(units) * cfg_.work_unit, s.loc);
      }
      return Flow::Normal;
    }
    case StmtKind::Fail:
      throw FailSignal{eval(f, *s.value, frame).as_int()};
    case StmtKind::Try:
      try {
        return exec_block(f, s.body, frame, ret);
      } catch (const FailSignal &) {
        return exec_block(f, s.else_body, frame, ret);
      }
    }
    return Flow::Normal;
  }

  Value eval(const FunctionDef &f, const Expr &e, std::vector<Value> &frame) {
    switch (e.kind) {
    case ExprKind::IntLit: return Value::of_int(e.int_value);
    case ExprKind::FloatLit: return Value::of_float(e.float_value);
    case ExprKind::BoolLit: return Value::of_bool(e.bool_value);
    case ExprKind::Var: return slot(frame, e.var);
    case ExprKind::Index: {
      const Value arr = slot(frame, e.var);
      const std::int64_t i = eval(f, *e.operands[0], frame).as_int();
      const auto &items = arr.as_array()->items;
      if (i < 0 || static_cast<std::size_t>(i) >= items.size())
        throw RuntimeError(e.loc, "index " + std::to_string(i) + " out of bounds for " + e.name);
      return items[static_cast<std::size_t>(i)];
    }
    case ExprKind::Unary: {
      const Value x = eval(f, *e.operands[0], frame);
      if (e.unary_op == UnaryOp::Not) return Value::of_bool(!x.as_bool());
      if (x.is_int()) return Value::of_int(wrap_sub(0, x.as_int()));
      return Value::of_float(-x.as_float());
    }
    case ExprKind::Binary: return binary(f, e, frame);
    case ExprKind::Call: {
      const FunctionDef &callee = prog_.functions[static_cast<std::size_t>(e.callee)];
      std::vector<Value> args;
      args.reserve(e.operands.size());
      for (const auto &a : e.operands)
        args.push_back(eval(f, *a, frame));
      return call(callee, std::move(args), e.loc);
    }
    case ExprKind::Builtin: return builtin(f, e, frame);
    case ExprKind::NewArray: {
      const std::int64_t n = eval(f, *e.operands[0], frame).as_int();
      if (n < 0) throw RuntimeError(e.loc, "negative array length");
      if (n > kMaxArray) throw RuntimeError(e.loc, "array too large");
      auto a = std::make_shared<ArrayObject>();
      a->elem = e.elem_type;
      a->items.assign(static_cast<std::size_t>(n), Value::default_of(Type::scalar(e.elem_type)));
      return Value::of_array(std::move(a));
    }
    }
    return {};
  }

  Value binary(const FunctionDef &f, const Expr &e, std::vector<Value> &frame) {
    if (e.binary_op == BinaryOp::And) {
      if (!eval(f, *e.operands[0], frame).as_bool()) return Value::of_bool(false);
      return Value::of_bool(eval(f, *e.operands[1], frame).as_bool());
    }
    if (e.binary_op == BinaryOp::Or) {
      if (eval(f, *e.operands[0], frame).as_bool()) return Value::of_bool(true);
      return Value::of_bool(eval(f, *e.operands[1], frame).as_bool());
    }
    const Value l = eval(f, *e.operands[0], frame);
    const Value r = eval(f, *e.operands[1], frame);
    if (l.is_bool()) {
      const bool eq = l.as_bool() == r.as_bool();
      return Value::of_bool(e.binary_op == BinaryOp::Eq ? eq : !eq);
    }
    if (l.is_int() && r.is_int()) {
      const std::int64_t a = l.as_int();
      const std::int64_t b = r.as_int();
      switch (e.binary_op) {
      case BinaryOp::Add: return Value::of_int(wrap_add(a, b));
      case BinaryOp::Sub: return Value::of_int(wrap_sub(a, b));
      case BinaryOp::Mul: return Value::of_int(wrap_mul(a, b));
      case BinaryOp::Div:
        if (b == 0) throw RuntimeError(e.loc, "division by zero");
        if (b == -1) return Value::of_int(wrap_sub(0, a));
        return Value::of_int(a / b);
      case BinaryOp::Mod:
        if (b == 0) throw RuntimeError(e.loc, "division by zero");
        if (b == -1) return Value::of_int(0);
        return Value::of_int(a % b);
      case BinaryOp::Lt: return Value::of_bool(a < b);
      case BinaryOp::Le: return Value::of_bool(a <= b);
      case BinaryOp::Gt: return Value::of_bool(a > b);
      case BinaryOp::Ge: return Value::of_bool(a >= b);
      case BinaryOp::Eq: return Value::of_bool(a == b);
      case BinaryOp::Ne: return Value::of_bool(a != b);
      default: break;
      }
      return {};
    }
    const double a = l.to_number();
    const double b = r.to_number();
    switch (e.binary_op) {
    case BinaryOp::Add: return Value::of_float(a + b);
    case BinaryOp::Sub: return Value::of_float(a - b);
    case BinaryOp::Mul: return Value::of_float(a * b);
    case BinaryOp::Div:
      if (b == 0.0) throw RuntimeError(e.loc, "division by zero");
      return Value::of_float(a / b);
    case BinaryOp::Lt: return Value::of_bool(a < b);
    case BinaryOp::Le: return Value::of_bool(a <= b);
    case BinaryOp::Gt: return Value::of_bool(a > b);
    case BinaryOp::Ge: return Value::of_bool(a >= b);
    case BinaryOp::Eq: return Value::of_bool(a == b);
    case BinaryOp::Ne: return Value::of_bool(a != b);
    default: break;
    }
    return {};
  }

  Value builtin(const FunctionDef &f, const Expr &e, std::vector<Value> &frame) {
    switch (e.builtin) {
    case Builtin::Read:
    case Builtin::ReadInt: {
      if (cursor_ >= input_.values.size())
        throw RuntimeError(e.loc, "read past end of input");
      const double v = input_.values[cursor_++];
      if (e.builtin == Builtin::Read) return Value::of_float(v);
      return Value::of_int(to_int(v, e.loc));
    }
    case Builtin::Eof: return Value::of_bool(cursor_ >= input_.values.size());
    case Builtin::Len: {
      const Value a = eval(f, *e.operands[0], frame);
      return Value::of_int(static_cast<std::int64_t>(a.as_array()->items.size()));
    }
    case Builtin::ToInt: {
      const Value x = eval(f, *e.operands[0], frame);
      if (x.is_int()) return x;
      return Value::of_int(to_int(x.as_float(), e.loc));
    }
    case Builtin::ToFloat: return Value::of_float(eval(f, *e.operands[0], frame).to_number());
    }
    return {};
  }

  static std::int64_t to_int(double v, SourceLoc loc) {
    const double t = std::trunc(v);
    if (!std::isfinite(t) || t >= 9.2e18 || t <= -9.2e18)
      throw RuntimeError(loc, "value out of int range");
    return static_cast<std::int64_t>(t);
  }
};

} // namespace

RunResult interpret(const Program &program, const InputRecord &input, const CostConfig &costs) {
  return Machine(program, input, costs).run();
}

} // namespace mantis::lang
