#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include <json.hpp>

#include "mantis/lang/parser.hpp"
#include "mantis/lang/printer.hpp"
#include "mantis/lang/sema.hpp"
#include "mantis/slicer/slicer.hpp"

namespace mantis::slicer {

using namespace lang;
using json = nlohmann::json;

UnsoundSliceError::UnsoundSliceError(std::size_t input, const std::string &message)
    : InternalError(message), input_(input) {}

int criterion_vertex(const Program &program, const SystemDependenceGraph &sdg,
                     const SliceCriterion &criterion) {
  const int g = program.find_global(criterion.variable);
  if (g < 0) throw UserError("slicing criterion " + criterion.variable + " is not a global");
  if (program.globals[static_cast<std::size_t>(g)].type.is_array)
    throw UserError("slicing criterion " + criterion.variable + " is an array");
  const int f = program.find_function(criterion.function);
  if (f < 0) throw UserError("unknown function " + criterion.function + " in slicing criterion");
  for (int v : sdg.pdgs.at(static_cast<std::size_t>(f)).formal_outs) {
    const Vertex &vx = sdg.vertices[static_cast<std::size_t>(v)];
    if (vx.role == PortRole::Location && vx.loc == Location{LocKind::Global, g}) return v;
  }
  return -1;
}

namespace {

void backward(const SystemDependenceGraph &sdg, std::vector<bool> &mark, std::deque<int> work,
              EdgeKind skip1, EdgeKind skip2) {
  while (!work.empty()) {
    const int v = work.front();
    work.pop_front();
    for (const Edge &e : sdg.preds[static_cast<std::size_t>(v)]) {
      if (e.kind == skip1 || e.kind == skip2) continue;
      if (mark[static_cast<std::size_t>(e.from)]) continue;
      mark[static_cast<std::size_t>(e.from)] = true;
      work.push_back(e.from);
    }
  }
}

} // namespace

std::vector<bool> two_pass_reachable(const SystemDependenceGraph &sdg, const std::vector<int> &seeds) {
  std::vector<bool> mark(sdg.size(), false);
  std::deque<int> work;
  for (int s : seeds)
    if (!mark[static_cast<std::size_t>(s)]) {
      mark[static_cast<std::size_t>(s)] = true;
      work.push_back(s);
    }
  backward(sdg, mark, work, EdgeKind::LinkageExit, EdgeKind::LinkageExit);
  work.clear();
  for (std::size_t v = 0; v < mark.size(); ++v)
    if (mark[v]) work.push_back(static_cast<int>(v));
  backward(sdg, mark, std::move(work), EdgeKind::LinkageEntry, EdgeKind::Call);
  return mark;
}

void executable_closure(const SystemDependenceGraph &sdg, std::vector<bool> &in_slice) {
  for (;;) {
    std::deque<int> seeds;
    for (const CallSite &cs : sdg.call_sites) {
      if (!in_slice[static_cast<std::size_t>(cs.call_vertex)]) continue;
      const auto &formals = sdg.pdgs[static_cast<std::size_t>(cs.callee)].formal_ins;
      for (std::size_t k = 0; k < formals.size(); ++k) {
        const int ai = cs.actual_ins[k];
        if (in_slice[static_cast<std::size_t>(formals[k])] && !in_slice[static_cast<std::size_t>(ai)]) {
          in_slice[static_cast<std::size_t>(ai)] = true;
          seeds.push_back(ai);
        }
      }
    }
    if (seeds.empty()) return;
    backward(sdg, in_slice, std::move(seeds), EdgeKind::LinkageEntry, EdgeKind::Call);
  }
}

namespace {

const char *kind_name(StmtKind k) {
  switch (k) {
  case StmtKind::VarDecl: return "declaration";
  case StmtKind::Assign: return "assignment";
  case StmtKind::If: return "if";
  case StmtKind::While: return "while";
  case StmtKind::For: return "for";
  case StmtKind::ExprStmt: return "expression";
  case StmtKind::Return: return "return";
  case StmtKind::Print: return "print";
  case StmtKind::Work: return "work";
  case StmtKind::Fail: return "fail";
  case StmtKind::Try: return "try";
  }
  return "?";
}

ExprPtr default_value(Type t) {
  if (t.is_array) {
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::NewArray;
    e->elem_type = t.base;
    e->operands.push_back(make_int(0));
    return e;
  }
  switch (t.base) {
  case BaseType::Float: return make_float(0.0);
  case BaseType::Bool: return make_bool(false);
  default: return make_int(0);
  }
}

class Emitter {
public:
  Emitter(const Program &p, const SystemDependenceGraph &g, const std::vector<bool> &in, Slice &out)
      : p_(p), g_(g), in_(in), out_(out) {}

  Program run(const SliceCriterion &criterion) {
    std::set<int> kept_functions;
    const int main_fn = p_.find_function(p_.entry);
    kept_functions.insert(main_fn);
    std::set<int> globals;
    globals.insert(p_.find_global(criterion.variable));
    for (const CallSite &cs : g_.call_sites)
      if (in(cs.call_vertex)) kept_functions.insert(cs.callee);
    for (std::size_t v = 0; v < g_.size(); ++v) {
      if (!in_[v]) continue;
      const Vertex &vx = g_.vertices[v];
      const bool emitted = vx.kind == VertexKind::Statement ||
                           (vx.kind == VertexKind::ActualIn && vx.role == PortRole::Param);
      if (!emitted) continue;
      for (const auto *list : {&vx.uses, &vx.defs})
        for (const Location &l : *list) {
          if (l.kind == LocKind::Global) globals.insert(l.index);
          if (l.kind == LocKind::Local) slots_[vx.function].insert(l.index);
        }
    }

    Program out;
    out.entry = p_.entry;
    for (int gi : globals)
      out.globals.push_back(p_.globals[static_cast<std::size_t>(gi)]);
    for (int f : kept_functions) {
      const FunctionDef &fn = p_.functions[static_cast<std::size_t>(f)];
      FunctionDef nf;
      nf.name = fn.name;
      nf.params = fn.params;
      nf.return_type = fn.return_type;
      nf.loc = fn.loc;
      fn_ = f;
      nf.body = block(fn.body);
      if (f == main_fn) {
        auto print = std::make_unique<Stmt>();
        print->kind = StmtKind::Print;
        print->probe = true;
        print->value = make_var(criterion.variable);
        nf.body.push_back(std::move(print));
      }
      out.functions.push_back(std::move(nf));
    }
    auto diags = check(out);
    if (!diags.empty()) {
      std::string msg = "emitted slice does not check: " + to_string(diags.front());
      throw InternalError(msg + "\n" + to_source(out));
    }
    return out;
  }

private:
  const Program &p_;
  const SystemDependenceGraph &g_;
  const std::vector<bool> &in_;
  Slice &out_;
  std::map<int, std::set<int>> slots_;
  int fn_ = -1;

  bool in(int v) const { return v >= 0 && in_[static_cast<std::size_t>(v)]; }

  bool stmt_in(const Stmt &s) const {
    auto it = g_.stmt_vertex.find(s.id);
    return it != g_.stmt_vertex.end() && in(it->second);
  }

  // Probes are instrumentation, not statements of the program being sliced.
  void record(const Stmt &s) {
    if (s.probe) return;
    out_.retained.push_back({p_.functions[static_cast<std::size_t>(fn_)].name, s.loc, kind_name(s.kind)});
  }

  // Clones a retained expression; call arguments whose actual-in vertex is
  // not in the slice become default values of the parameter type.
  ExprPtr expr(const Expr &e) {
    ExprPtr c = e.clone();
    fix(*c);
    return c;
  }

  void fix(Expr &e) {
    if (e.kind == ExprKind::Call) {
      const CallSite &cs = g_.call_sites.at(static_cast<std::size_t>(g_.call_site_of_expr.at(e.id)));
      const FunctionDef &callee = p_.functions[static_cast<std::size_t>(cs.callee)];
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (in(cs.actual_ins[i])) fix(*e.operands[i]);
        else e.operands[i] = default_value(callee.params[i].type);
      }
      return;
    }
    for (auto &op : e.operands)
      fix(*op);
  }

  ExprPtr opt(const ExprPtr &e) { return e ? expr(*e) : nullptr; }

  Block block(const Block &b) {
    Block out;
    for (const auto &s : b)
      stmt(*s, out);
    return out;
  }

  // Retained calls of a statement that is itself dropped, as call
  // statements in evaluation order.
  void hoist(const Expr &e, Block &out) {
    if (e.kind == ExprKind::Call) {
      const CallSite &cs = g_.call_sites.at(static_cast<std::size_t>(g_.call_site_of_expr.at(e.id)));
      if (in(cs.call_vertex)) {
        auto n = std::make_unique<Stmt>();
        n->kind = StmtKind::ExprStmt;
        n->loc = e.loc;
        n->value = expr(e);
        out_.retained.push_back({p_.functions[static_cast<std::size_t>(fn_)].name, e.loc, "call"});
        out.push_back(std::move(n));
        return;
      }
    }
    for (const auto &op : e.operands)
      hoist(*op, out);
  }

  StmtPtr shell(const Stmt &s) {
    auto n = std::make_unique<Stmt>();
    n->kind = s.kind;
    n->loc = s.loc;
    n->probe = s.probe;
    n->name = s.name;
    n->decl_type = s.decl_type;
    return n;
  }

  void stmt(const Stmt &s, Block &out) {
    if (s.kind == StmtKind::Try) {
      const std::size_t mark = out_.retained.size();
      Block body = block(s.body);
      Block rescue = block(s.else_body);
      if (body.empty() && rescue.empty()) return;
      auto n = shell(s);
      n->body = std::move(body);
      n->else_body = std::move(rescue);
      out_.retained.insert(out_.retained.begin() + static_cast<std::ptrdiff_t>(mark),
                           {p_.functions[static_cast<std::size_t>(fn_)].name, s.loc, kind_name(s.kind)});
      out.push_back(std::move(n));
      return;
    }
    if (!stmt_in(s)) {
      if (s.kind == StmtKind::VarDecl && slots_[fn_].count(s.var.index)) {
        // Referenced, but the initial value is never needed.
        ++out_.repair_initializers;
        record(s);
        out.push_back(shell(s));
      }
      for (const Expr *e : {s.index.get(), s.value.get(), s.value2.get()})
        if (e) hoist(*e, out);
      return;
    }
    record(s);
    auto n = shell(s);
    n->index = opt(s.index);
    n->value = opt(s.value);
    n->value2 = opt(s.value2);
    if (s.kind == StmtKind::If || s.kind == StmtKind::While || s.kind == StmtKind::For) {
      n->body = block(s.body);
      n->else_body = block(s.else_body);
      n->has_else = !n->else_body.empty();
    }
    out.push_back(std::move(n));
  }
};

} // namespace

Slice emit_slice(const Program &program, const SystemDependenceGraph &sdg, const std::vector<bool> &vertices,
                 const SliceCriterion &criterion) {
  if (vertices.size() != sdg.size()) throw InternalError("vertex set does not match the SDG");
  Slice s;
  s.criterion = criterion;
  s.vertices = vertices;
  s.program = Emitter(program, sdg, vertices, s).run(criterion);
  return s;
}

Slice slice_program(const Program &program, const SystemDependenceGraph &sdg, const SliceCriterion &criterion) {
  const int v = criterion_vertex(program, sdg, criterion);
  std::vector<bool> mark(sdg.size(), false);
  std::vector<std::string> warnings;
  if (v < 0) {
    warnings.push_back("criterion variable " + criterion.variable + " is never written");
  } else {
    mark = two_pass_reachable(sdg, {v});
    executable_closure(sdg, mark);
  }
  Slice s = emit_slice(program, sdg, mark, criterion);
  s.warnings = std::move(warnings);
  return s;
}

CostReport slice_cost(const Program &slice, const Program &original, const std::vector<InputRecord> &inputs,
                      const SliceCriterion &criterion) {
  CostReport r;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    RunResult o;
    try {
      o = interpret(original, inputs[i]);
    } catch (const RuntimeError &) {
      ++r.skipped;
      continue;
    }
    RunResult s;
    try {
      s = interpret(slice, inputs[i]);
    } catch (const RuntimeError &e) {
      throw UnsoundSliceError(i, "slice on " + criterion.variable + " fails on input " + std::to_string(i) +
                                     " where the original succeeds: " + e.what());
    }
    auto a = o.globals.find(criterion.variable);
    auto b = s.globals.find(criterion.variable);
    if (a == o.globals.end() || b == s.globals.end())
      throw UserError("criterion " + criterion.variable + " is not a scalar global of both programs");
    if (!(a->second == b->second))
      throw UnsoundSliceError(i, "slice on " + criterion.variable + " computes " + b->second.to_string() +
                                     " instead of " + a->second.to_string() + " on input " + std::to_string(i));
    const double ratio = o.cost == 0 ? (s.cost == 0 ? 1.0 : std::numeric_limits<double>::infinity())
                                     : static_cast<double>(s.cost) / static_cast<double>(o.cost);
    r.ratios.push_back(ratio);
    r.slice_cost += s.cost;
    r.original_cost += o.cost;
  }
  r.compared = r.ratios.size();
  if (!r.ratios.empty()) {
    double sum = 0;
    for (double x : r.ratios)
      sum += x;
    r.mean_ratio = sum / static_cast<double>(r.ratios.size());
    r.max_ratio = *std::max_element(r.ratios.begin(), r.ratios.end());
  }
  return r;
}

std::string manifest_json(const Slice &slice, const CostReport *report) {
  json j;
  j["criterion"] = {{"variable", slice.criterion.variable}, {"function", slice.criterion.function}};
  j["retained"] = json::array();
  for (const auto &r : slice.retained)
    j["retained"].push_back({{"function", r.function}, {"line", r.loc.line}, {"column", r.loc.column}, {"kind", r.kind}});
  j["repairInitializers"] = slice.repair_initializers;
  j["warnings"] = slice.warnings;
  if (report) {
    j["cost"] = {{"compared", report->compared},
                 {"skipped", report->skipped},
                 {"meanRatio", report->mean_ratio},
                 {"maxRatio", report->max_ratio},
                 {"sliceCost", report->slice_cost},
                 {"originalCost", report->original_cost}};
  }
  return j.dump(2) + "\n";
}

} // namespace mantis::slicer
