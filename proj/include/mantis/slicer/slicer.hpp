#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mantis/error.hpp"
#include "mantis/lang/ast.hpp"
#include "mantis/lang/interpreter.hpp"

namespace mantis::slicer {

// Abstract locations tracked by the dependence analysis. Site h stands for
// every element of every array allocated at node h. Cursor is the input
// position consumed by read()/readInt() and observed by eof(); Ret is the
// return value of the enclosing function.
enum class LocKind : std::uint8_t { Local, Global, Site, Cursor, Ret };

struct Location {
  LocKind kind = LocKind::Local;
  int index = 0; // slot, global index or site id; 0 for Cursor and Ret

  friend auto operator<=>(const Location &, const Location &) = default;
};

std::string to_string(const Location &l);

enum class VertexKind : std::uint8_t {
  Entry,
  FormalIn,
  FormalOut,
  Statement, // simple statement, or the predicate of if/while/for
  Call,
  ActualIn,
  ActualOut,
  Auxiliary, // normal exit, exit join and stop nodes of the CFG
};

// What a formal or actual vertex carries.
enum class PortRole : std::uint8_t { None, Param, Location, Return, Failure };

const char *to_string(VertexKind k);

struct Vertex {
  VertexKind kind = VertexKind::Auxiliary;
  int function = -1;
  int stmt = -1;       // statement id for Statement vertices
  int call_site = -1;  // index into SystemDependenceGraph::call_sites
  PortRole role = PortRole::None;
  int param = -1;      // parameter index when role == Param
  Location loc;        // when role == Location
  lang::SourceLoc src;
  std::vector<Location> uses;
  std::vector<Location> defs;
};

enum class EdgeKind : std::uint8_t {
  Data,
  Control,
  Call,        // call vertex -> callee entry
  LinkageEntry, // actual-in -> formal-in
  LinkageExit,  // formal-out -> actual-out
  Summary,     // actual-in -> actual-out
};

const char *to_string(EdgeKind k);

struct Edge {
  int from = -1;
  EdgeKind kind = EdgeKind::Data;

  friend bool operator==(const Edge &, const Edge &) = default;
};

struct ProcedureDependenceGraph {
  int function = -1;
  int entry = -1;
  std::vector<int> vertices;
  std::vector<int> formal_ins;  // parameters, then locations
  std::vector<int> formal_outs; // locations, then return, then failure
};

struct CallSite {
  int expr = -1;   // id of the call expression
  int caller = -1;
  int callee = -1;
  int call_vertex = -1;
  int container = -1; // vertex whose evaluation performs the call
  std::vector<int> actual_ins;  // aligned with the callee's formal_ins
  std::vector<int> actual_outs; // aligned with the callee's formal_outs
};

struct SystemDependenceGraph {
  std::vector<Vertex> vertices;
  std::vector<std::vector<Edge>> preds; // incoming edges per vertex
  std::vector<ProcedureDependenceGraph> pdgs; // one per function
  std::vector<CallSite> call_sites;
  std::map<int, int> stmt_vertex; // statement id -> vertex
  std::map<int, int> call_site_of_expr;
  // Allocation sites each array variable may refer to.
  std::map<std::pair<int, int>, std::vector<int>> local_points_to; // (function, slot)
  std::map<int, std::vector<int>> global_points_to;

  std::size_t size() const { return vertices.size(); }
  bool has_edge(int from, int to, EdgeKind kind) const;
  std::size_t summary_edge_count() const;
};

// Builds every PDG and links them with call and linkage edges. Summary edges
// are not added. Requires a checked program.
SystemDependenceGraph build_sdg(const lang::Program &program);

// Backward path-edge computation over each function; installs an
// actual-in -> actual-out summary edge at every call site whenever a
// formal-in reaches a formal-out of the callee. Iterates to a fixpoint.
void add_summary_edges(SystemDependenceGraph &sdg);

// build_sdg followed by add_summary_edges.
SystemDependenceGraph build_sliceable_sdg(const lang::Program &program);

struct SliceCriterion {
  std::string variable;           // a global
  std::string function = "main";  // exit point
};

// Formal-out vertex of `variable` at the exit of `function`, or -1 when the
// variable is never written.
int criterion_vertex(const lang::Program &program, const SystemDependenceGraph &sdg,
                     const SliceCriterion &criterion);

// Pass 1 follows every edge backwards except linkage-exit edges; pass 2
// starts from everything pass 1 reached and follows every edge except
// linkage-entry and call edges.
std::vector<bool> two_pass_reachable(const SystemDependenceGraph &sdg, const std::vector<int> &seeds);

// Extends a slice until every retained call site supplies correct values for
// all callee formal-ins that the slice uses, so a callee body shared by
// several retained call sites never runs on defaulted inputs it depends on.
void executable_closure(const SystemDependenceGraph &sdg, std::vector<bool> &in_slice);

struct RetainedStatement {
  std::string function;
  lang::SourceLoc loc;
  std::string kind;
};

struct Slice {
  SliceCriterion criterion;
  lang::Program program;
  std::vector<bool> vertices;
  std::vector<RetainedStatement> retained;
  // Declarations kept without their initializer.
  std::size_t repair_initializers = 0;
  std::vector<std::string> warnings;
};

// Turns a vertex set into a checked program: retained statements in their
// original order and nesting, calls keep their callee's signature with
// unused arguments replaced by defaults, declarations of referenced
// variables are kept, and main ends by printing the criterion.
Slice emit_slice(const lang::Program &program, const SystemDependenceGraph &sdg,
                 const std::vector<bool> &vertices, const SliceCriterion &criterion);

// criterion_vertex, two_pass_reachable, executable_closure and emit_slice.
// The program must be checked and the SDG must carry summary edges.
Slice slice_program(const lang::Program &program, const SystemDependenceGraph &sdg,
                    const SliceCriterion &criterion);

class UnsoundSliceError : public InternalError {
public:
  UnsoundSliceError(std::size_t input, const std::string &message);
  std::size_t input() const { return input_; }

private:
  std::size_t input_;
};

struct CostReport {
  std::vector<double> ratios; // per compared input
  double mean_ratio = 0;
  double max_ratio = 0;
  std::size_t compared = 0;
  // Inputs on which the original program hits a runtime error.
  std::size_t skipped = 0;
  std::uint64_t slice_cost = 0;
  std::uint64_t original_cost = 0;
};

// Runs both programs on every input, checks that the criterion's final value
// agrees and reports cost(slice) / cost(original). Throws UnsoundSliceError
// on the first disagreement.
CostReport slice_cost(const lang::Program &slice, const lang::Program &original,
                      const std::vector<lang::InputRecord> &inputs, const SliceCriterion &criterion);

std::string manifest_json(const Slice &slice, const CostReport *report = nullptr);

} // namespace mantis::slicer
