#include "mantis/instrument/instrument.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "mantis/error.hpp"
#include "mantis/lang/parser.hpp"

namespace mantis::instrument {

using namespace lang;
using json = nlohmann::json;

const char *to_string(FeatureKind k) {
  switch (k) {
  case FeatureKind::Loop: return "loop";
  case FeatureKind::Branch: return "branch";
  case FeatureKind::Call: return "call";
  case FeatureKind::Exception: return "exception";
  case FeatureKind::VarVersion: return "varVersion";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string &s) {
  for (auto k : {FeatureKind::Loop, FeatureKind::Branch, FeatureKind::Call,
                 FeatureKind::Exception, FeatureKind::VarVersion})
    if (s == to_string(k)) return k;
  throw UserError("unknown feature kind: " + s);
}

int FeatureSchema::find(const std::string &id) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> FeatureSchema::ids() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto &f : features)
    out.push_back(f.id);
  return out;
}

std::string to_json(const FeatureSchema &schema) {
  json j;
  j["versionsPerVariable"] = schema.versions_per_variable;
  j["features"] = json::array();
  for (const auto &f : schema.features) {
    json e;
    e["id"] = f.id;
    e["kind"] = to_string(f.kind);
    e["function"] = f.function;
    e["line"] = f.site.line;
    e["column"] = f.site.column;
    e["detail"] = f.detail;
    if (f.version >= 0) e["version"] = f.version;
    e["global"] = f.global;
    j["features"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

FeatureSchema schema_from_json(const std::string &text) {
  FeatureSchema s;
  try {
    const json j = json::parse(text);
    s.versions_per_variable = j.at("versionsPerVariable").get<int>();
    for (const auto &e : j.at("features")) {
      FeatureDecl f;
      f.id = e.at("id").get<std::string>();
      f.kind = feature_kind_from_string(e.at("kind").get<std::string>());
      f.function = e.at("function").get<std::string>();
      f.site = {e.at("line").get<int>(), e.at("column").get<int>()};
      f.detail = e.at("detail").get<std::string>();
      f.version = e.value("version", -1);
      f.global = e.at("global").get<std::string>();
      s.features.push_back(std::move(f));
    }
  } catch (const json::exception &e) {
    throw UserError(std::string("malformed feature schema: ") + e.what());
  }
  return s;
}

namespace {

constexpr const char *kPrefix = "mantis_";

bool reserved(const std::string &name) { return name.rfind(kPrefix, 0) == 0; }

StmtPtr probe_increment(const std::string &name) {
  auto s = make_assign(name, make_binary(BinaryOp::Add, make_var(name), make_int(1)));
  s->probe = true;
  return s;
}

StmtPtr make_if(ExprPtr cond, Block then_body, Block else_body) {
  auto s = std::make_unique<Stmt>();
  s->kind = StmtKind::If;
  s->value = std::move(cond);
  s->body = std::move(then_body);
  s->has_else = !else_body.empty();
  s->else_body = std::move(else_body);
  return s;
}

struct Tracked {
  std::string counter;
  std::vector<std::string> versions;
};

class Instrumenter {
public:
  Instrumenter(const Program &p, const InstrumentConfig &cfg) : src_(p), cfg_(cfg), out_(p) {}

  Instrumented run() {
    if (cfg_.versions_per_variable < 1)
      throw UserError("versions per variable must be at least 1");
    reject_reserved_names();
    schema_.versions_per_variable = cfg_.versions_per_variable;
    bool any = false;
    for (std::size_t fi = 0; fi < out_.functions.size(); ++fi) {
      FunctionDef &f = out_.functions[fi];
      if (excluded(f.name)) continue;
      any = true;
      fn_ = static_cast<int>(fi);
      tracked_slots_.clear();
      if (cfg_.track_locals) {
        for_each_stmt(f.body, [&](const Stmt &s) {
          if (s.kind == StmtKind::VarDecl && s.decl_type.is_scalar() && !s.probe)
            tracked_slots_.emplace(s.var.index, s.loc);
        });
      }
      const std::string var = add_feature(FeatureKind::Call, f.name, f.loc, f.name, "call");
      rewrite(f.body);
      f.body.insert(f.body.begin(), probe_increment(var));
    }
    Instrumented result;
    if (!any) result.warnings.push_back("every function is excluded; the schema is empty");
    for (auto &g : new_globals_)
      out_.globals.push_back(std::move(g));
    auto diags = check(out_);
    if (!diags.empty())
      throw InternalError("instrumented program does not check: " + to_string(diags.front()));
    result.program = std::move(out_);
    result.schema = std::move(schema_);
    return result;
  }

private:
  const Program &src_;
  const InstrumentConfig &cfg_;
  Program out_;
  FeatureSchema schema_;
  std::vector<GlobalDecl> new_globals_;
  std::map<std::tuple<FeatureKind, std::string, int>, int> ordinals_;
  std::map<std::string, int> name_counters_;
  std::map<std::pair<int, int>, Tracked> tracked_;
  std::map<int, SourceLoc> tracked_slots_; // slot -> declaration
  int fn_ = -1;

  bool excluded(const std::string &name) const {
    return std::find(cfg_.exclude_functions.begin(), cfg_.exclude_functions.end(), name) !=
           cfg_.exclude_functions.end();
  }

  void reject_reserved_names() const {
    for (const auto &g : src_.globals)
      if (reserved(g.name)) throw UserError("global " + g.name + " uses the reserved prefix mantis_");
    for (const auto &f : src_.functions) {
      if (reserved(f.name)) throw UserError("function " + f.name + " uses the reserved prefix mantis_");
      for (const auto &n : f.slot_names)
        if (reserved(n)) throw UserError("variable " + n + " uses the reserved prefix mantis_");
    }
  }

  std::string fresh_global(const std::string &stem, Type type) {
    const int n = name_counters_[stem]++;
    GlobalDecl g;
    g.name = std::string(kPrefix) + stem + "_" + std::to_string(n);
    g.type = type;
    new_globals_.push_back(g);
    return g.name;
  }

  std::string next_id(FeatureKind kind, const std::string &fn, int line) {
    const int ord = ordinals_[{kind, fn, line}]++;
    return std::string(to_string(kind)) + ":" + fn + ":" + std::to_string(line) + ":" +
           std::to_string(ord);
  }

  std::string add_feature(FeatureKind kind, const std::string &fn, SourceLoc loc,
                          const std::string &detail, const std::string &stem) {
    FeatureDecl d;
    d.id = next_id(kind, fn, loc.line);
    d.kind = kind;
    d.function = fn;
    d.site = loc;
    d.detail = detail;
    d.global = fresh_global(stem, Type::scalar(BaseType::Int));
    schema_.features.push_back(d);
    return d.global;
  }

  const Tracked *tracked_for(const Stmt &s) {
    if (s.probe || s.index) return nullptr;
    if (s.kind == StmtKind::VarDecl && !s.value) return nullptr;
    if (s.kind != StmtKind::VarDecl && s.kind != StmtKind::Assign) return nullptr;
    const FunctionDef &f = out_.functions[static_cast<std::size_t>(fn_)];
    std::pair<int, int> key;
    std::string fn_name;
    SourceLoc site;
    Type type;
    std::string name;
    if (s.var.scope == VarScope::Local) {
      auto slot = tracked_slots_.find(s.var.index);
      if (slot == tracked_slots_.end()) return nullptr;
      key = {fn_, s.var.index};
      fn_name = f.name;
      type = f.slot_types[static_cast<std::size_t>(s.var.index)];
      name = f.slot_names[static_cast<std::size_t>(s.var.index)];
      site = slot->second;
    } else if (s.var.scope == VarScope::Global) {
      if (!cfg_.track_globals) return nullptr;
      const GlobalDecl &g = src_.globals[static_cast<std::size_t>(s.var.index)];
      if (!g.type.is_scalar()) return nullptr;
      key = {-1, s.var.index};
      fn_name = "global";
      type = g.type;
      name = g.name;
      site = g.loc;
    } else {
      return nullptr;
    }
    auto it = tracked_.find(key);
    if (it != tracked_.end()) return &it->second;
    Tracked t;
    const int n = name_counters_["var"]++;
    const std::string stem = std::string(kPrefix) + "var_" + std::to_string(n);
    t.counter = std::string(kPrefix) + "vc_" + std::to_string(n);
    new_globals_.push_back(GlobalDecl{t.counter, Type::scalar(BaseType::Int), 0, {}, {}, -1});
    const std::string base_id = next_id(FeatureKind::VarVersion, fn_name, site.line);
    for (int j = 0; j < cfg_.versions_per_variable; ++j) {
      FeatureDecl d;
      d.id = base_id + ":v" + std::to_string(j);
      d.kind = FeatureKind::VarVersion;
      d.function = fn_name;
      d.site = site;
      d.detail = name;
      d.version = j;
      d.global = stem + "_v" + std::to_string(j);
      new_globals_.push_back(GlobalDecl{d.global, type, 0, {}, {}, -1});
      t.versions.push_back(d.global);
      schema_.features.push_back(std::move(d));
    }
    return &tracked_.emplace(key, std::move(t)).first->second;
  }

  // if (vc < k) { if (vc == 0) { v0 = x; } else if ... ; vc = vc + 1; }
  StmtPtr version_probe(const Tracked &t, const std::string &var) {
    const int k = static_cast<int>(t.versions.size());
    StmtPtr chain;
    for (int j = k - 1; j >= 0; --j) {
      Block record;
      record.push_back(make_assign(t.versions[static_cast<std::size_t>(j)], make_var(var)));
      if (!chain) {
        chain = std::move(record.front());
        continue;
      }
      Block rest;
      rest.push_back(std::move(chain));
      chain = make_if(make_binary(BinaryOp::Eq, make_var(t.counter), make_int(j)),
                      std::move(record), std::move(rest));
    }
    Block body;
    body.push_back(std::move(chain));
    body.push_back(make_assign(t.counter,
                               make_binary(BinaryOp::Add, make_var(t.counter), make_int(1))));
    auto s = make_if(make_binary(BinaryOp::Lt, make_var(t.counter), make_int(k)), std::move(body),
                     {});
    s->probe = true;
    return s;
  }

  void rewrite(Block &b) {
    Block nb;
    for (auto &s : b) {
      rewrite_stmt(*s);
      StmtPtr after;
      if (const Tracked *t = tracked_for(*s)) after = version_probe(*t, s->name);
      nb.push_back(std::move(s));
      if (after) nb.push_back(std::move(after));
    }
    b = std::move(nb);
  }

  void rewrite_stmt(Stmt &s) {
    if (s.probe) return;
    const std::string &fn = out_.functions[static_cast<std::size_t>(fn_)].name;
    switch (s.kind) {
    case StmtKind::If: {
      const std::string then_var = add_feature(FeatureKind::Branch, fn, s.loc, "then", "branch");
      const std::string else_var = add_feature(FeatureKind::Branch, fn, s.loc, "else", "branch");
      rewrite(s.body);
      rewrite(s.else_body);
      s.body.insert(s.body.begin(), probe_increment(then_var));
      s.else_body.insert(s.else_body.begin(), probe_increment(else_var));
      s.has_else = true;
      break;
    }
    case StmtKind::While:
    case StmtKind::For: {
      const std::string var = add_feature(FeatureKind::Loop, fn, s.loc,
                                          s.kind == StmtKind::While ? "while" : "for", "loop");
      rewrite(s.body);
      s.body.insert(s.body.begin(), probe_increment(var));
      break;
    }
    case StmtKind::Try: {
      const std::string var = add_feature(FeatureKind::Exception, fn, s.loc, "rescue", "exc");
      rewrite(s.body);
      rewrite(s.else_body);
      s.else_body.insert(s.else_body.begin(), probe_increment(var));
      break;
    }
    default:
      break;
    }
  }
};

void collect_assigned(const Block &b, std::set<std::string> &out) {
  for_each_stmt(b, [&](const Stmt &s) {
    if (s.kind == StmtKind::Assign) out.insert(s.name);
  });
}

template <typename F> void for_each_top_probe(const Program &p, F &&f) {
  for (const auto &fn : p.functions)
    for_each_stmt(fn.body, [&](const Stmt &s) {
      if (s.probe_site >= 0) f(fn, s);
    });
}

void drop_sites(Block &b, const std::set<int> &sites) {
  Block nb;
  for (auto &s : b) {
    if (s->probe_site >= 0 && sites.count(s->probe_site)) continue;
    drop_sites(s->body, sites);
    drop_sites(s->else_body, sites);
    nb.push_back(std::move(s));
  }
  b = std::move(nb);
}

} // namespace

Instrumented instrument(const Program &program, const InstrumentConfig &config) {
  return Instrumenter(program, config).run();
}

std::vector<double> feature_vector(const FeatureSchema &schema, const RunResult &run) {
  std::vector<double> out;
  out.reserve(schema.features.size());
  for (const auto &f : schema.features) {
    auto it = run.globals.find(f.global);
    if (it == run.globals.end())
      throw InternalError("run has no value for feature global " + f.global);
    out.push_back(it->second.to_number());
  }
  return out;
}

std::vector<ProbeSite> probe_sites(const Program &instrumented, const FeatureSchema &schema) {
  std::map<std::string, std::string> by_global;
  for (const auto &f : schema.features)
    by_global[f.global] = f.id;
  std::vector<ProbeSite> sites(static_cast<std::size_t>(instrumented.probe_site_count));
  for_each_top_probe(instrumented, [&](const FunctionDef &fn, const Stmt &s) {
    ProbeSite &site = sites[static_cast<std::size_t>(s.probe_site)];
    site.loc = s.loc;
    site.function = fn.name;
    std::set<std::string> assigned;
    if (s.kind == StmtKind::Assign) assigned.insert(s.name);
    collect_assigned(s.body, assigned);
    collect_assigned(s.else_body, assigned);
    for (const auto &name : assigned) {
      auto it = by_global.find(name);
      if (it != by_global.end()) site.features.push_back(it->second);
    }
  });
  return sites;
}

SiteProfile collect_site_profile(const Program &instrumented, const std::vector<InputRecord> &inputs) {
  SiteProfile prof;
  prof.hits.assign(static_cast<std::size_t>(instrumented.probe_site_count), 0);
  for (const auto &in : inputs) {
    RunResult r;
    try {
      r = interpret(instrumented, in);
    } catch (const RuntimeError &) {
      continue;
    }
    prof.total_cost += r.cost;
    for (std::size_t i = 0; i < r.probe_hits.size(); ++i)
      prof.hits[i] += r.probe_hits[i];
  }
  return prof;
}

Pruned prune_instrumentation(const Program &instrumented, const FeatureSchema &schema,
                             const SiteProfile &profile, double budget) {
  if (!(budget > 0 && budget < 1)) throw UserError("overhead budget must lie in (0, 1)");
  if (profile.hits.size() != static_cast<std::size_t>(instrumented.probe_site_count))
    throw UserError("site profile does not match the instrumented program");
  auto overhead = [&](std::uint64_t hits) {
    if (profile.total_cost == 0)
      return hits == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(hits) / static_cast<double>(profile.total_cost);
  };
  std::uint64_t remaining = 0;
  for (auto h : profile.hits)
    remaining += h;

  Pruned out;
  out.overhead_before = overhead(remaining);
  std::vector<bool> gone(profile.hits.size(), false);
  while (overhead(remaining) > budget) {
    int best = -1;
    for (std::size_t i = 0; i < profile.hits.size(); ++i)
      if (!gone[i] && (best < 0 || profile.hits[i] > profile.hits[static_cast<std::size_t>(best)]))
        best = static_cast<int>(i);
    if (best < 0 || profile.hits[static_cast<std::size_t>(best)] == 0) break;
    gone[static_cast<std::size_t>(best)] = true;
    remaining -= profile.hits[static_cast<std::size_t>(best)];
    out.removed_sites.push_back(best);
  }
  out.overhead_after = overhead(remaining);

  out.program = instrumented;
  out.schema = schema;
  if (out.removed_sites.empty()) return out;

  const std::set<int> removed(out.removed_sites.begin(), out.removed_sites.end());
  for (auto &f : out.program.functions)
    drop_sites(f.body, removed);
  auto diags = check(out.program);
  if (!diags.empty())
    throw InternalError("pruned program does not check: " + to_string(diags.front()));

  std::set<std::string> live;
  for (const auto &site : probe_sites(out.program, schema))
    live.insert(site.features.begin(), site.features.end());
  std::erase_if(out.schema.features, [&](const FeatureDecl &f) { return !live.count(f.id); });
  return out;
}

} // namespace mantis::instrument
