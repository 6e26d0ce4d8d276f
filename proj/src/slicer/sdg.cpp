#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <unordered_set>

#include "mantis/slicer/slicer.hpp"

namespace mantis::slicer {

using namespace lang;

std::string to_string(const Location &l) {
  switch (l.kind) {
  case LocKind::Local: return "local#" + std::to_string(l.index);
  case LocKind::Global: return "global#" + std::to_string(l.index);
  case LocKind::Site: return "site#" + std::to_string(l.index);
  case LocKind::Cursor: return "cursor";
  case LocKind::Ret: return "ret";
  }
  return "?";
}

const char *to_string(VertexKind k) {
  switch (k) {
  case VertexKind::Entry: return "entry";
  case VertexKind::FormalIn: return "formal-in";
  case VertexKind::FormalOut: return "formal-out";
  case VertexKind::Statement: return "statement";
  case VertexKind::Call: return "call";
  case VertexKind::ActualIn: return "actual-in";
  case VertexKind::ActualOut: return "actual-out";
  case VertexKind::Auxiliary: return "auxiliary";
  }
  return "?";
}

const char *to_string(EdgeKind k) {
  switch (k) {
  case EdgeKind::Data: return "data";
  case EdgeKind::Control: return "control";
  case EdgeKind::Call: return "call";
  case EdgeKind::LinkageEntry: return "linkage-entry";
  case EdgeKind::LinkageExit: return "linkage-exit";
  case EdgeKind::Summary: return "summary";
  }
  return "?";
}

bool SystemDependenceGraph::has_edge(int from, int to, EdgeKind kind) const {
  const auto &p = preds.at(static_cast<std::size_t>(to));
  return std::find(p.begin(), p.end(), Edge{from, kind}) != p.end();
}

std::size_t SystemDependenceGraph::summary_edge_count() const {
  std::size_t n = 0;
  for (const auto &p : preds)
    for (const auto &e : p)
      n += e.kind == EdgeKind::Summary;
  return n;
}

namespace {

struct Port {
  PortRole role = PortRole::None;
  int param = -1;
  Location loc;
};

// Whole-program facts the PDGs need before any of them is built.
struct Analysis {
  std::map<std::pair<int, int>, std::set<int>> local_pts;
  std::map<int, std::set<int>> global_pts;
  std::vector<std::set<int>> ret_pts;
  std::vector<std::set<Location>> ref, mod;
  std::vector<bool> may_fail;
  std::vector<std::vector<Port>> formal_ins, formal_outs;
};

Location var_loc(VarRef r) {
  return r.scope == VarScope::Global ? Location{LocKind::Global, r.index}
                                     : Location{LocKind::Local, r.index};
}

class Analyzer {
public:
  explicit Analyzer(const Program &p) : p_(p) {}

  Analysis run() {
    const std::size_t nf = p_.functions.size();
    a_.ret_pts.resize(nf);
    a_.ref.resize(nf);
    a_.mod.resize(nf);
    a_.may_fail.assign(nf, false);
    points_to();
    mod_ref();
    failures();
    for (std::size_t f = 0; f < nf; ++f) {
      const FunctionDef &fn = p_.functions[f];
      std::vector<Port> ins, outs;
      for (std::size_t i = 0; i < fn.params.size(); ++i)
        ins.push_back({PortRole::Param, static_cast<int>(i), {}});
      std::set<Location> in_locs = a_.ref[f];
      in_locs.insert(a_.mod[f].begin(), a_.mod[f].end());
      for (const auto &l : in_locs)
        ins.push_back({PortRole::Location, -1, l});
      for (const auto &l : a_.mod[f])
        outs.push_back({PortRole::Location, -1, l});
      if (!fn.return_type.is_void()) outs.push_back({PortRole::Return, -1, {LocKind::Ret, 0}});
      if (a_.may_fail[f]) outs.push_back({PortRole::Failure, -1, {}});
      a_.formal_ins.push_back(std::move(ins));
      a_.formal_outs.push_back(std::move(outs));
    }
    return std::move(a_);
  }

private:
  const Program &p_;
  Analysis a_;

  std::set<int> *var_pts(int f, VarRef r) {
    if (r.scope == VarScope::Global) return &a_.global_pts[r.index];
    if (r.scope == VarScope::Local) return &a_.local_pts[{f, r.index}];
    return nullptr;
  }

  std::set<int> expr_pts(int f, const Expr &e) {
    switch (e.kind) {
    case ExprKind::Var:
      if (auto *s = var_pts(f, e.var)) return *s;
      return {};
    case ExprKind::NewArray: return {e.id};
    case ExprKind::Call: return a_.ret_pts[static_cast<std::size_t>(e.callee)];
    default: return {};
    }
  }

  static bool merge(std::set<int> &into, const std::set<int> &from) {
    const std::size_t before = into.size();
    into.insert(from.begin(), from.end());
    return into.size() != before;
  }

  // Flow-insensitive inclusion constraints over array-valued variables,
  // parameters and return values, solved by iteration.
  void points_to() {
    for (const auto &g : p_.globals)
      if (g.type.is_array) a_.global_pts[static_cast<int>(&g - p_.globals.data())].insert(g.id);
    for (std::size_t f = 0; f < p_.functions.size(); ++f)
      if (p_.functions[f].return_type.is_array)
        a_.ret_pts[f].insert(p_.node_count + static_cast<int>(f)); // default return value
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t fi = 0; fi < p_.functions.size(); ++fi) {
        const int f = static_cast<int>(fi);
        const FunctionDef &fn = p_.functions[fi];
        for_each_stmt(fn.body, [&](const Stmt &s) {
          if (s.kind == StmtKind::VarDecl && s.decl_type.is_array) {
            auto &dst = *var_pts(f, s.var);
            changed |= s.value ? merge(dst, expr_pts(f, *s.value)) : merge(dst, {s.id});
          } else if (s.kind == StmtKind::Assign && !s.index) {
            if (auto *dst = var_pts(f, s.var); dst && s.value->type.is_array)
              changed |= merge(*dst, expr_pts(f, *s.value));
          } else if (s.kind == StmtKind::Return && s.value && fn.return_type.is_array) {
            changed |= merge(a_.ret_pts[fi], expr_pts(f, *s.value));
          }
          for_each_stmt_expr(s, [&](const Expr &e) {
            if (e.kind != ExprKind::Call) return;
            const FunctionDef &callee = p_.functions[static_cast<std::size_t>(e.callee)];
            for (std::size_t i = 0; i < callee.params.size(); ++i)
              if (callee.params[i].type.is_array)
                changed |= merge(a_.local_pts[{e.callee, static_cast<int>(i)}],
                                 expr_pts(f, *e.operands[i]));
          });
        });
      }
    }
  }

  void sites_of(int f, VarRef r, std::set<Location> &out) {
    if (auto *s = var_pts(f, r))
      for (int h : *s)
        out.insert({LocKind::Site, h});
  }

  void mod_ref() {
    std::vector<std::set<int>> callees(p_.functions.size());
    for (std::size_t fi = 0; fi < p_.functions.size(); ++fi) {
      const int f = static_cast<int>(fi);
      auto &ref = a_.ref[fi];
      auto &mod = a_.mod[fi];
      for_each_stmt(p_.functions[fi].body, [&](const Stmt &s) {
        if (s.kind == StmtKind::Assign) {
          if (s.index) {
            if (s.var.scope == VarScope::Global) ref.insert(var_loc(s.var));
            sites_of(f, s.var, mod);
          } else if (s.var.scope == VarScope::Global) {
            mod.insert(var_loc(s.var));
          }
        }
        for_each_stmt_expr(s, [&](const Expr &e) {
          switch (e.kind) {
          case ExprKind::Var:
            if (e.var.scope == VarScope::Global) ref.insert(var_loc(e.var));
            break;
          case ExprKind::Index:
            if (e.var.scope == VarScope::Global) ref.insert(var_loc(e.var));
            sites_of(f, e.var, ref);
            break;
          case ExprKind::Builtin:
            if (e.builtin == Builtin::Read || e.builtin == Builtin::ReadInt) {
              ref.insert({LocKind::Cursor, 0});
              mod.insert({LocKind::Cursor, 0});
            } else if (e.builtin == Builtin::Eof) {
              ref.insert({LocKind::Cursor, 0});
            }
            break;
          case ExprKind::Call: callees[fi].insert(e.callee); break;
          default: break;
          }
        });
      });
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t f = 0; f < p_.functions.size(); ++f)
        for (int c : callees[f]) {
          const std::size_t before = a_.ref[f].size() + a_.mod[f].size();
          a_.ref[f].insert(a_.ref[static_cast<std::size_t>(c)].begin(), a_.ref[static_cast<std::size_t>(c)].end());
          a_.mod[f].insert(a_.mod[static_cast<std::size_t>(c)].begin(), a_.mod[static_cast<std::size_t>(c)].end());
          changed |= a_.ref[f].size() + a_.mod[f].size() != before;
        }
    }
  }

  // A function may fail if a fail statement or a call to a failing function
  // can execute outside the protected body of every enclosing try.
  bool block_fails(const Block &b, bool is_protected) {
    bool any = false;
    for (const auto &s : b) {
      if (!is_protected) {
        if (s->kind == StmtKind::Fail) any = true;
        for_each_stmt_expr(*s, [&](const Expr &e) {
          if (e.kind == ExprKind::Call && a_.may_fail[static_cast<std::size_t>(e.callee)]) any = true;
        });
      }
      if (s->kind == StmtKind::Try) {
        any |= block_fails(s->body, true);
        any |= block_fails(s->else_body, is_protected);
      } else {
        any |= block_fails(s->body, is_protected);
        any |= block_fails(s->else_body, is_protected);
      }
    }
    return any;
  }

  void failures() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t f = 0; f < p_.functions.size(); ++f)
        if (!a_.may_fail[f] && block_fails(p_.functions[f].body, false)) {
          a_.may_fail[f] = true;
          changed = true;
        }
    }
  }
};

// Builds one function's CFG over SDG vertices, then its data and control
// dependences. Statements are laid out backwards from their continuation.
class PdgBuilder {
public:
  PdgBuilder(const Program &p, const Analysis &a, SystemDependenceGraph &g, int f)
      : p_(p), a_(a), g_(g), f_(f), fn_(p.functions[static_cast<std::size_t>(f)]),
        base_(static_cast<int>(g.vertices.size())) {}

  void build() {
    ProcedureDependenceGraph &pdg = g_.pdgs[static_cast<std::size_t>(f_)];
    pdg.function = f_;
    const int entry = add(VertexKind::Entry, fn_.loc);
    pdg.entry = entry;
    std::vector<int> chain;
    for (const Port &port : a_.formal_ins[static_cast<std::size_t>(f_)]) {
      const int v = add(VertexKind::FormalIn, fn_.loc);
      set_port(v, port);
      if (port.role == PortRole::Param) def(v, {LocKind::Local, port.param}, true);
      else def(v, port.loc, true);
      pdg.formal_ins.push_back(v);
      chain.push_back(v);
    }
    normal_exit_ = add(VertexKind::Auxiliary, fn_.loc);
    int ret_out = -1;
    const int join = add(VertexKind::Auxiliary, fn_.loc);
    std::vector<int> loc_outs;
    for (const Port &port : a_.formal_outs[static_cast<std::size_t>(f_)]) {
      const int v = add(VertexKind::FormalOut, fn_.loc);
      set_port(v, port);
      switch (port.role) {
      case PortRole::Location:
        use(v, port.loc);
        loc_outs.push_back(v);
        break;
      case PortRole::Return:
        use(v, {LocKind::Ret, 0});
        ret_out = v;
        break;
      default: fail_exit_ = v; break;
      }
      pdg.formal_outs.push_back(v);
    }
    const int stop = add(VertexKind::Auxiliary, fn_.loc);
    if (ret_out >= 0) {
      link(normal_exit_, ret_out);
      link(ret_out, join);
    } else {
      link(normal_exit_, join);
    }
    if (fail_exit_ >= 0) link(fail_exit_, join);
    int prev = join;
    for (int v : loc_outs) {
      link(prev, v);
      prev = v;
    }
    link(prev, stop);

    const int body = build_block(fn_.body, normal_exit_, -1);
    prev = entry;
    for (int v : chain) {
      link(prev, v);
      prev = v;
    }
    link(prev, body);
    pseudo(entry, stop);

    data_dependences();
    control_dependences(entry, stop);
  }

private:
  const Program &p_;
  const Analysis &a_;
  SystemDependenceGraph &g_;
  int f_;
  const FunctionDef &fn_;
  int base_;
  int normal_exit_ = -1;
  int fail_exit_ = -1;
  std::vector<int> handlers_;
  std::vector<std::vector<int>> succ_, pseudo_;
  std::vector<std::vector<Location>> kills_;
  std::vector<int> seq_;
  const Expr *discarded_ = nullptr; // call statement whose result is unused
  int conditional_ = 0;             // depth of right operands of && and ||

  int local(int v) const { return v - base_; }

  int add(VertexKind kind, SourceLoc loc) {
    Vertex v;
    v.kind = kind;
    v.function = f_;
    v.src = loc;
    g_.vertices.push_back(std::move(v));
    g_.preds.emplace_back();
    succ_.emplace_back();
    pseudo_.emplace_back();
    kills_.emplace_back();
    const int id = static_cast<int>(g_.vertices.size()) - 1;
    g_.pdgs[static_cast<std::size_t>(f_)].vertices.push_back(id);
    return id;
  }

  Vertex &vx(int v) { return g_.vertices[static_cast<std::size_t>(v)]; }

  void set_port(int v, const Port &port) {
    vx(v).role = port.role;
    vx(v).param = port.param;
    vx(v).loc = port.loc;
  }

  void use(int v, Location l) {
    auto &u = vx(v).uses;
    if (std::find(u.begin(), u.end(), l) == u.end()) u.push_back(l);
  }

  void def(int v, Location l, bool strong) {
    auto &d = vx(v).defs;
    if (std::find(d.begin(), d.end(), l) == d.end()) d.push_back(l);
    if (strong) kills_[static_cast<std::size_t>(local(v))].push_back(l);
  }

  void link(int from, int to) {
    auto &s = succ_[static_cast<std::size_t>(local(from))];
    if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
  }

  void pseudo(int from, int to) { pseudo_[static_cast<std::size_t>(local(from))].push_back(to); }

  void edge(int from, int to, EdgeKind kind) { g_.preds[static_cast<std::size_t>(to)].push_back({from, kind}); }

  int handler() const { return handlers_.empty() ? fail_exit_ : handlers_.back(); }

  void add_sites(int v, VarRef r) {
    const std::set<int> *pts = nullptr;
    if (r.scope == VarScope::Global) {
      auto it = a_.global_pts.find(r.index);
      if (it != a_.global_pts.end()) pts = &it->second;
    } else {
      auto it = a_.local_pts.find({f_, r.index});
      if (it != a_.local_pts.end()) pts = &it->second;
    }
    if (pts)
      for (int h : *pts)
        use(v, {LocKind::Site, h});
  }

  // Records the uses of `e` evaluated directly by `owner` and lays out the
  // call chains of nested calls, in evaluation order, into seq_.
  void scan(const Expr &e, int owner) {
    switch (e.kind) {
    case ExprKind::Var: use(owner, var_loc(e.var)); return;
    case ExprKind::Index:
      use(owner, var_loc(e.var));
      add_sites(owner, e.var);
      scan(*e.operands[0], owner);
      return;
    case ExprKind::Builtin:
      if (e.builtin == Builtin::Read || e.builtin == Builtin::ReadInt) {
        use(owner, {LocKind::Cursor, 0});
        def(owner, {LocKind::Cursor, 0}, false);
      } else if (e.builtin == Builtin::Eof) {
        use(owner, {LocKind::Cursor, 0});
      }
      for (const auto &op : e.operands)
        scan(*op, owner);
      return;
    case ExprKind::Call: call_chain(e, owner); return;
    case ExprKind::Binary:
      if (e.binary_op == BinaryOp::And || e.binary_op == BinaryOp::Or) {
        scan(*e.operands[0], owner);
        ++conditional_;
        scan(*e.operands[1], owner);
        --conditional_;
        return;
      }
      [[fallthrough]];
    default:
      for (const auto &op : e.operands)
        scan(*op, owner);
      return;
    }
  }

  void call_chain(const Expr &e, int owner) {
    CallSite cs;
    cs.expr = e.id;
    cs.caller = f_;
    cs.callee = e.callee;
    cs.container = owner;
    const auto &ins = a_.formal_ins[static_cast<std::size_t>(e.callee)];
    const auto &outs = a_.formal_outs[static_cast<std::size_t>(e.callee)];
    for (const Port &port : ins) {
      const int v = add(VertexKind::ActualIn, e.loc);
      set_port(v, port);
      if (port.role == PortRole::Location) use(v, port.loc);
      cs.actual_ins.push_back(v);
    }
    for (std::size_t i = 0; i < e.operands.size(); ++i) {
      scan(*e.operands[i], cs.actual_ins[i]);
      seq_.push_back(cs.actual_ins[i]);
    }
    for (std::size_t i = e.operands.size(); i < ins.size(); ++i)
      seq_.push_back(cs.actual_ins[i]);
    cs.call_vertex = add(VertexKind::Call, e.loc);
    seq_.push_back(cs.call_vertex);
    for (const Port &port : outs) {
      const int v = add(VertexKind::ActualOut, e.loc);
      set_port(v, port);
      if (port.role == PortRole::Location) def(v, port.loc, false);
      cs.actual_outs.push_back(v);
      seq_.push_back(v);
      if (port.role == PortRole::Return && &e != discarded_) edge(v, owner, EdgeKind::Data);
    }
    const int site = static_cast<int>(g_.call_sites.size());
    for (int v : cs.actual_ins) {
      vx(v).call_site = site;
      edge(cs.call_vertex, v, EdgeKind::Control);
    }
    for (int v : cs.actual_outs) {
      vx(v).call_site = site;
      edge(cs.call_vertex, v, EdgeKind::Control);
    }
    vx(cs.call_vertex).call_site = site;
    edge(cs.call_vertex, owner, EdgeKind::Control);
    // A call can be emitted on its own in place of a statement that is not
    // needed. Calls in arguments or behind && and || cannot, so those drag
    // their container along.
    if (vx(owner).kind != VertexKind::Statement || conditional_ > 0)
      edge(owner, cs.call_vertex, EdgeKind::Control);
    g_.call_site_of_expr[e.id] = site;
    g_.call_sites.push_back(std::move(cs));
  }

  int with_calls(int owner, std::initializer_list<const Expr *> exprs, int after) {
    seq_.clear();
    for (const Expr *e : exprs)
      if (e) scan(*e, owner);
    const std::vector<int> seq = std::move(seq_);
    seq_.clear();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      link(seq[i], i + 1 < seq.size() ? seq[i + 1] : after);
      const Vertex &v = vx(seq[i]);
      if (v.kind == VertexKind::ActualOut && v.role == PortRole::Failure) link(seq[i], handler());
    }
    return seq.empty() ? after : seq.front();
  }

  int stmt_vertex(const Stmt &s, int enclosing) {
    const int v = add(VertexKind::Statement, s.loc);
    vx(v).stmt = s.id;
    g_.stmt_vertex[s.id] = v;
    if (enclosing >= 0) edge(enclosing, v, EdgeKind::Control);
    return v;
  }

  int build_block(const Block &b, int next, int enclosing) {
    for (auto it = b.rbegin(); it != b.rend(); ++it)
      next = build_stmt(**it, next, enclosing);
    return next;
  }

  int build_stmt(const Stmt &s, int next, int enclosing) {
    switch (s.kind) {
    case StmtKind::VarDecl: {
      const int v = stmt_vertex(s, enclosing);
      def(v, var_loc(s.var), true);
      link(v, next);
      return with_calls(v, {s.value.get()}, v);
    }
    case StmtKind::Assign: {
      const int v = stmt_vertex(s, enclosing);
      if (s.index) {
        use(v, var_loc(s.var));
        if (s.var.scope == VarScope::Global) {
          auto it = a_.global_pts.find(s.var.index);
          if (it != a_.global_pts.end())
            for (int h : it->second)
              def(v, {LocKind::Site, h}, false);
        } else {
          auto it = a_.local_pts.find({f_, s.var.index});
          if (it != a_.local_pts.end())
            for (int h : it->second)
              def(v, {LocKind::Site, h}, false);
        }
      } else {
        def(v, var_loc(s.var), true);
      }
      link(v, next);
      return with_calls(v, {s.index.get(), s.value.get()}, v);
    }
    case StmtKind::ExprStmt:
      discarded_ = s.value.get();
      [[fallthrough]];
    case StmtKind::Print:
    case StmtKind::Work: {
      const int v = stmt_vertex(s, enclosing);
      link(v, next);
      return with_calls(v, {s.value.get()}, v);
    }
    case StmtKind::Return: {
      const int v = stmt_vertex(s, enclosing);
      if (s.value) def(v, {LocKind::Ret, 0}, true);
      link(v, normal_exit_);
      pseudo(v, next);
      return with_calls(v, {s.value.get()}, v);
    }
    case StmtKind::Fail: {
      const int v = stmt_vertex(s, enclosing);
      link(v, handler());
      pseudo(v, next);
      return with_calls(v, {s.value.get()}, v);
    }
    case StmtKind::If: {
      const int v = stmt_vertex(s, enclosing);
      const int head = with_calls(v, {s.value.get()}, v);
      link(v, build_block(s.body, next, v));
      link(v, build_block(s.else_body, next, v));
      return head;
    }
    case StmtKind::While: {
      const int v = stmt_vertex(s, enclosing);
      const int head = with_calls(v, {s.value.get()}, v);
      link(v, build_block(s.body, head, v));
      link(v, next);
      return head;
    }
    case StmtKind::For: {
      const int v = stmt_vertex(s, enclosing);
      def(v, var_loc(s.var), true);
      const int head = with_calls(v, {s.value.get(), s.value2.get()}, v);
      link(v, build_block(s.body, v, v));
      link(v, next);
      return head;
    }
    case StmtKind::Try: {
      const int rescue = build_block(s.else_body, next, enclosing);
      handlers_.push_back(rescue);
      const int body = build_block(s.body, next, enclosing);
      handlers_.pop_back();
      return body;
    }
    }
    return next;
  }

  // Reaching definitions over the real CFG edges; every use gets a data
  // edge from each definition of its location that may reach it.
  void data_dependences() {
    const int n = static_cast<int>(succ_.size());
    std::vector<std::pair<int, Location>> defs; // (vertex, location)
    std::map<Location, std::vector<int>> defs_of;
    std::vector<std::vector<int>> gen(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (const Location &l : vx(base_ + i).defs) {
        const int d = static_cast<int>(defs.size());
        defs.push_back({base_ + i, l});
        defs_of[l].push_back(d);
        gen[static_cast<std::size_t>(i)].push_back(d);
      }
    const std::size_t words = (defs.size() + 63) / 64;
    using Bits = std::vector<std::uint64_t>;
    auto set_bit = [](Bits &b, int d) { b[static_cast<std::size_t>(d) / 64] |= std::uint64_t{1} << (d % 64); };
    auto test_bit = [](const Bits &b, int d) {
      return (b[static_cast<std::size_t>(d) / 64] >> (d % 64)) & 1U;
    };
    std::vector<Bits> keep(static_cast<std::size_t>(n), Bits(words, ~std::uint64_t{0}));
    std::vector<Bits> gen_bits(static_cast<std::size_t>(n), Bits(words, 0));
    for (int i = 0; i < n; ++i) {
      for (const Location &l : kills_[static_cast<std::size_t>(i)])
        for (int d : defs_of[l])
          keep[static_cast<std::size_t>(i)][static_cast<std::size_t>(d) / 64] &= ~(std::uint64_t{1} << (d % 64));
      for (int d : gen[static_cast<std::size_t>(i)])
        set_bit(gen_bits[static_cast<std::size_t>(i)], d);
    }
    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int s : succ_[static_cast<std::size_t>(i)])
        preds[static_cast<std::size_t>(local(s))].push_back(i);
    std::vector<Bits> in(static_cast<std::size_t>(n), Bits(words, 0)), out = in;
    std::deque<int> work;
    std::vector<bool> queued(static_cast<std::size_t>(n), true);
    for (int i = 0; i < n; ++i)
      work.push_back(i);
    while (!work.empty()) {
      const int i = work.front();
      work.pop_front();
      queued[static_cast<std::size_t>(i)] = false;
      Bits &cur_in = in[static_cast<std::size_t>(i)];
      for (int p : preds[static_cast<std::size_t>(i)])
        for (std::size_t w = 0; w < words; ++w)
          cur_in[w] |= out[static_cast<std::size_t>(p)][w];
      bool changed = false;
      for (std::size_t w = 0; w < words; ++w) {
        const std::uint64_t v =
            gen_bits[static_cast<std::size_t>(i)][w] | (cur_in[w] & keep[static_cast<std::size_t>(i)][w]);
        if (v != out[static_cast<std::size_t>(i)][w]) {
          out[static_cast<std::size_t>(i)][w] = v;
          changed = true;
        }
      }
      if (changed)
        for (int s : succ_[static_cast<std::size_t>(i)]) {
          const int ls = local(s);
          if (!queued[static_cast<std::size_t>(ls)]) {
            queued[static_cast<std::size_t>(ls)] = true;
            work.push_back(ls);
          }
        }
    }
    for (int i = 0; i < n; ++i)
      for (const Location &l : vx(base_ + i).uses) {
        auto it = defs_of.find(l);
        if (it == defs_of.end()) continue;
        for (int d : it->second)
          if (test_bit(in[static_cast<std::size_t>(i)], d))
            edge(defs[static_cast<std::size_t>(d)].first, base_ + i, EdgeKind::Data);
      }
  }

  // Control dependence from the postdominator tree of the CFG augmented with
  // entry -> stop and with fall-through edges out of return and fail.
  void control_dependences(int entry, int stop) {
    const int n = static_cast<int>(succ_.size());
    std::vector<std::vector<int>> aug(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int s : succ_[static_cast<std::size_t>(i)])
        aug[static_cast<std::size_t>(i)].push_back(local(s));
      for (int s : pseudo_[static_cast<std::size_t>(i)])
        if (std::find(aug[static_cast<std::size_t>(i)].begin(), aug[static_cast<std::size_t>(i)].end(),
                      local(s)) == aug[static_cast<std::size_t>(i)].end())
          aug[static_cast<std::size_t>(i)].push_back(local(s));
      for (int s : aug[static_cast<std::size_t>(i)])
        rev[static_cast<std::size_t>(s)].push_back(i);
    }
    const int root = local(stop);
    // Postorder of the reverse graph from the stop node.
    std::vector<int> order;
    std::vector<int> rpo_index(static_cast<std::size_t>(n), -1);
    {
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
      seen[static_cast<std::size_t>(root)] = true;
      while (!stack.empty()) {
        auto &[node, next] = stack.back();
        if (next < rev[static_cast<std::size_t>(node)].size()) {
          const int m = rev[static_cast<std::size_t>(node)][next++];
          if (!seen[static_cast<std::size_t>(m)]) {
            seen[static_cast<std::size_t>(m)] = true;
            stack.push_back({m, 0});
          }
        } else {
          order.push_back(node);
          stack.pop_back();
        }
      }
      std::reverse(order.begin(), order.end());
      for (std::size_t i = 0; i < order.size(); ++i)
        rpo_index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
      if (static_cast<int>(order.size()) != n)
        throw InternalError("CFG of " + fn_.name + " has nodes that cannot reach its exit");
    }
    std::vector<int> ipdom(static_cast<std::size_t>(n), -1);
    ipdom[static_cast<std::size_t>(root)] = root;
    auto intersect = [&](int a, int b) {
      while (a != b) {
        while (rpo_index[static_cast<std::size_t>(a)] > rpo_index[static_cast<std::size_t>(b)])
          a = ipdom[static_cast<std::size_t>(a)];
        while (rpo_index[static_cast<std::size_t>(b)] > rpo_index[static_cast<std::size_t>(a)])
          b = ipdom[static_cast<std::size_t>(b)];
      }
      return a;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (int node : order) {
        if (node == root) continue;
        int best = -1;
        for (int s : aug[static_cast<std::size_t>(node)]) {
          if (ipdom[static_cast<std::size_t>(s)] < 0) continue;
          best = best < 0 ? s : intersect(s, best);
        }
        if (best != ipdom[static_cast<std::size_t>(node)]) {
          ipdom[static_cast<std::size_t>(node)] = best;
          changed = true;
        }
      }
    }
    std::vector<int> depth(static_cast<std::size_t>(n), 0);
    for (int node : order)
      if (node != root) depth[static_cast<std::size_t>(node)] = depth[static_cast<std::size_t>(ipdom[static_cast<std::size_t>(node)])] + 1;
    auto postdominates = [&](int b, int a) {
      while (depth[static_cast<std::size_t>(a)] > depth[static_cast<std::size_t>(b)])
        a = ipdom[static_cast<std::size_t>(a)];
      return a == b;
    };
    (void)entry;
    for (int a = 0; a < n; ++a)
      for (int b : aug[static_cast<std::size_t>(a)]) {
        if (postdominates(b, a)) continue;
        const int stop_at = ipdom[static_cast<std::size_t>(a)];
        for (int r = b; r != stop_at && r != root; r = ipdom[static_cast<std::size_t>(r)])
          edge(base_ + a, base_ + r, EdgeKind::Control);
      }
  }
};

void dedupe(std::vector<Edge> &edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge &x, const Edge &y) {
    return std::pair(x.from, x.kind) < std::pair(y.from, y.kind);
  });
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

} // namespace

SystemDependenceGraph build_sdg(const Program &program) {
  if (program.find_function(program.entry) < 0) throw UserError("program has no " + program.entry);
  const Analysis a = Analyzer(program).run();
  SystemDependenceGraph g;
  g.pdgs.resize(program.functions.size());
  for (std::size_t f = 0; f < program.functions.size(); ++f)
    PdgBuilder(program, a, g, static_cast<int>(f)).build();
  for (const CallSite &cs : g.call_sites) {
    const auto &callee = g.pdgs[static_cast<std::size_t>(cs.callee)];
    g.preds[static_cast<std::size_t>(callee.entry)].push_back({cs.call_vertex, EdgeKind::Call});
    for (std::size_t k = 0; k < cs.actual_ins.size(); ++k)
      g.preds[static_cast<std::size_t>(callee.formal_ins[k])].push_back({cs.actual_ins[k], EdgeKind::LinkageEntry});
    for (std::size_t k = 0; k < cs.actual_outs.size(); ++k)
      g.preds[static_cast<std::size_t>(cs.actual_outs[k])].push_back({callee.formal_outs[k], EdgeKind::LinkageExit});
  }
  for (auto &p : g.preds)
    dedupe(p);
  for (const auto &[key, sites] : a.local_pts)
    g.local_points_to[key] = std::vector<int>(sites.begin(), sites.end());
  for (const auto &[key, sites] : a.global_pts)
    g.global_points_to[key] = std::vector<int>(sites.begin(), sites.end());
  return g;
}

void add_summary_edges(SystemDependenceGraph &g) {
  const std::size_t n = g.vertices.size();
  std::vector<int> in_pos(n, -1), out_pos(n, -1);
  for (const auto &pdg : g.pdgs) {
    for (std::size_t k = 0; k < pdg.formal_ins.size(); ++k)
      in_pos[static_cast<std::size_t>(pdg.formal_ins[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < pdg.formal_outs.size(); ++k)
      out_pos[static_cast<std::size_t>(pdg.formal_outs[k])] = static_cast<int>(k);
  }
  std::vector<std::vector<int>> sites_of(g.pdgs.size());
  for (std::size_t s = 0; s < g.call_sites.size(); ++s)
    sites_of[static_cast<std::size_t>(g.call_sites[s].callee)].push_back(static_cast<int>(s));

  // path[v]: formal-outs reached from v along same-level paths.
  std::vector<std::vector<int>> path(n);
  std::unordered_set<std::uint64_t> seen;
  std::deque<std::pair<int, int>> work;
  auto propagate = [&](int v, int fo) {
    const std::uint64_t key = (static_cast<std::uint64_t>(v) << 32) | static_cast<std::uint32_t>(fo);
    if (!seen.insert(key).second) return;
    path[static_cast<std::size_t>(v)].push_back(fo);
    work.push_back({v, fo});
  };
  for (const auto &pdg : g.pdgs)
    for (int fo : pdg.formal_outs)
      propagate(fo, fo);
  while (!work.empty()) {
    const auto [v, fo] = work.front();
    work.pop_front();
    const Vertex &vx = g.vertices[static_cast<std::size_t>(v)];
    if (vx.kind == VertexKind::FormalIn) {
      const int k = in_pos[static_cast<std::size_t>(v)];
      const int j = out_pos[static_cast<std::size_t>(fo)];
      for (int s : sites_of[static_cast<std::size_t>(vx.function)]) {
        const CallSite &cs = g.call_sites[static_cast<std::size_t>(s)];
        const int ai = cs.actual_ins[static_cast<std::size_t>(k)];
        const int ao = cs.actual_outs[static_cast<std::size_t>(j)];
        if (g.has_edge(ai, ao, EdgeKind::Summary)) continue;
        g.preds[static_cast<std::size_t>(ao)].push_back({ai, EdgeKind::Summary});
        const std::vector<int> reached = path[static_cast<std::size_t>(ao)];
        for (int x : reached)
          propagate(ai, x);
      }
      continue;
    }
    for (const Edge &e : g.preds[static_cast<std::size_t>(v)])
      if (e.kind == EdgeKind::Data || e.kind == EdgeKind::Control || e.kind == EdgeKind::Summary)
        propagate(e.from, fo);
  }
}

SystemDependenceGraph build_sliceable_sdg(const Program &program) {
  SystemDependenceGraph g = build_sdg(program);
  add_summary_edges(g);
  return g;
}

} // namespace mantis::slicer
