#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mantis/lang/ast.hpp"
#include "mantis/lang/interpreter.hpp"

namespace mantis::instrument {

enum class FeatureKind : std::uint8_t { Loop, Branch, Call, Exception, VarVersion };

const char *to_string(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string &s);

struct FeatureDecl {
  // `<kind>:<function>:<line>:<ordinal>`, plus `:v<j>` for versions.
  std::string id;
  FeatureKind kind = FeatureKind::Loop;
  std::string function; // "global" for versions of global variables
  lang::SourceLoc site;
  // Loop: "while"/"for"; branch: "then"/"else"; call: callee name;
  // exception: "rescue"; varVersion: variable name.
  std::string detail;
  int version = -1;
  // Global variable of the instrumented program holding the value.
  std::string global;
};

struct FeatureSchema {
  std::vector<FeatureDecl> features;
  int versions_per_variable = 5;

  int find(const std::string &id) const;
  std::vector<std::string> ids() const;
};

std::string to_json(const FeatureSchema &schema);
FeatureSchema schema_from_json(const std::string &text);

struct InstrumentConfig {
  int versions_per_variable = 5;
  bool track_locals = true;
  bool track_globals = true;
  std::vector<std::string> exclude_functions;
};

struct Instrumented {
  lang::Program program;
  FeatureSchema schema;
  std::vector<std::string> warnings;
};

// Adds zero-cost probe statements maintaining one global per feature. The
// input must be checked; the result is checked.
Instrumented instrument(const lang::Program &program, const InstrumentConfig &config = {});

// Feature values of one run, in schema order (bools as 0/1).
std::vector<double> feature_vector(const FeatureSchema &schema, const lang::RunResult &run);

// Top-level probe statements of an instrumented program, indexed like
// Stmt::probe_site, with the features each one writes.
struct ProbeSite {
  lang::SourceLoc loc;
  std::string function;
  std::vector<std::string> features;
};

std::vector<ProbeSite> probe_sites(const lang::Program &instrumented, const FeatureSchema &schema);

struct SiteProfile {
  std::vector<std::uint64_t> hits; // per probe site, summed over runs
  std::uint64_t total_cost = 0;    // program cost summed over the same runs
};

struct Pruned {
  lang::Program program;
  FeatureSchema schema;
  std::vector<int> removed_sites; // in removal order
  double overhead_before = 0;
  double overhead_after = 0;
};

// Greedily drops the most frequently executed probe site until the
// estimated overhead (probe executions / program cost) is within budget.
// Features left without any probe site leave the schema.
Pruned prune_instrumentation(const lang::Program &instrumented, const FeatureSchema &schema,
                             const SiteProfile &profile, double budget);

// Sum of probe hits and costs over runs of `instrumented` on `inputs`.
SiteProfile collect_site_profile(const lang::Program &instrumented,
                                 const std::vector<lang::InputRecord> &inputs);

} // namespace mantis::instrument
