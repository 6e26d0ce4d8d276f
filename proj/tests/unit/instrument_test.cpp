#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "mantis/instrument/instrument.hpp"
#include "mantis/lang/parser.hpp"
#include "mantis/lang/printer.hpp"
#include "program_gen.hpp"


using namespace mantis::lang;
using namespace mantis::instrument;

namespace {

std::vector<const FeatureDecl *> of_kind(const FeatureSchema &s, FeatureKind k) {
  std::vector<const FeatureDecl *> out;
  for (const auto &f : s.features)
    if (f.kind == k) out.push_back(&f);
  return out;
}

std::map<std::string, double> values(const Instrumented &ins, std::vector<double> input) {
  RunResult r = interpret(ins.program, InputRecord{std::move(input)});
  auto v = feature_vector(ins.schema, r);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out[ins.schema.features[i].id] = v[i];
  return out;
}

const char *kReadLoop = R"(fn main() {
  int j = 0;
  while (!eof()) {
    int n = readInt();
    for i in 0..n {
      j = j + i;
    }
  }
  print(j);
}
)";

} // namespace

TEST(Instrument, NestedLoopsGetTwoLoopFeatures) {
  auto ins = instrument(parse(kReadLoop));
  auto loops = of_kind(ins.schema, FeatureKind::Loop);
  ASSERT_EQ(loops.size(), 2u);
  EXPECT_EQ(loops[0]->id, "loop:main:3:0");
  EXPECT_EQ(loops[1]->id, "loop:main:5:0");

  // Each loop body now starts with its counter increment.
  const Stmt *outer = nullptr;
  for (const auto &s : ins.program.functions[0].body)
    if (s->kind == StmtKind::While) outer = s.get();
  ASSERT_NE(outer, nullptr);
  ASSERT_TRUE(outer->body.front()->probe);
  EXPECT_EQ(outer->body.front()->name, loops[0]->global);

  auto v = values(ins, {3, 2, 0});
  EXPECT_EQ(v["loop:main:3:0"], 3);
  EXPECT_EQ(v["loop:main:5:0"], 5);
}

TEST(Instrument, BranchArms) {
  auto ins = instrument(parse(R"(
fn light() { work(1); }
fn heavy() { work(100); }
fn main() {
  while (!eof()) {
    bool flag = readInt() > 0;
    if (flag) { light(); } else { heavy(); }
    if (flag) { work(2); }
  }
})"));
  auto branches = of_kind(ins.schema, FeatureKind::Branch);
  ASSERT_EQ(branches.size(), 4u);
  EXPECT_EQ(branches[0]->detail, "then");
  EXPECT_EQ(branches[1]->detail, "else");
  auto v = values(ins, {1, 0, 1, 1, 0});
  EXPECT_EQ(v[branches[0]->id], 3);
  EXPECT_EQ(v[branches[1]->id], 2);
  EXPECT_EQ(v[branches[2]->id], 3);
  EXPECT_EQ(v[branches[3]->id], 2); // fall-through counted on the synthesized else
}

TEST(Instrument, CallFeatureCountsRecursiveInvocations) {
  auto ins = instrument(parse(R"(
fn process(int n) { if (n > 0) { process(n - 1); } }
fn main() { process(readInt()); }
)"));
  auto calls = of_kind(ins.schema, FeatureKind::Call);
  ASSERT_EQ(calls.size(), 2u);
  const FeatureDecl *process = calls[0]->detail == "process" ? calls[0] : calls[1];
  EXPECT_EQ(process->id, "call:process:2:0");
  EXPECT_EQ(values(ins, {4})[process->id], 5);
}

TEST(Instrument, VariableVersions) {
  auto ins = instrument(parse(R"(
fn preprocess() -> int { return readInt() * 2; }
fn compute(int n) { for i in 0..n { work(1); } }
fn main() {
  int n = 0;
  n = preprocess();
  compute(n);
}
)"));
  std::vector<const FeatureDecl *> n_versions;
  for (const auto *f : of_kind(ins.schema, FeatureKind::VarVersion))
    if (f->detail == "n" && f->function == "main") n_versions.push_back(f);
  ASSERT_EQ(n_versions.size(), 5u);
  EXPECT_EQ(n_versions[0]->id, "varVersion:main:5:0:v0");
  EXPECT_EQ(n_versions[4]->id, "varVersion:main:5:0:v4");
  auto v = values(ins, {21});
  EXPECT_EQ(v[n_versions[0]->id], 0);
  EXPECT_EQ(v[n_versions[1]->id], 42);
  for (int j = 2; j < 5; ++j)
    EXPECT_EQ(v[n_versions[static_cast<std::size_t>(j)]->id], 0);
}

TEST(Instrument, VersionBoundKeepsFirstK) {
  auto ins = instrument(parse("global int x; fn main() { for i in 0..10 { x = i * i; } }"),
                        InstrumentConfig{3, true, true, {}});
  auto vs = of_kind(ins.schema, FeatureKind::VarVersion);
  ASSERT_EQ(vs.size(), 3u);
  EXPECT_EQ(vs[0]->function, "global");
  auto v = values(ins, {});
  EXPECT_EQ(v[vs[0]->id], 0);
  EXPECT_EQ(v[vs[1]->id], 1);
  EXPECT_EQ(v[vs[2]->id], 4);
}

TEST(Instrument, ExceptionCountsRescueEntries) {
  auto ins = instrument(parse(R"(
fn main() {
  while (!eof()) {
    int c = readInt();
    try { if (c > 5) { fail(c); } } rescue { work(3); }
  }
})"));
  auto ex = of_kind(ins.schema, FeatureKind::Exception);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(values(ins, {1, 7, 9, 2, 6})[ex[0]->id], 3);
}

TEST(Instrument, StableIdsAndJsonRoundTrip) {
  Program p = parse(kReadLoop);
  auto a = instrument(p);
  auto b = instrument(parse(to_source(p)));
  EXPECT_EQ(a.schema.ids(), b.schema.ids());
  EXPECT_EQ(to_source(a.program), to_source(b.program));
  FeatureSchema back = schema_from_json(to_json(a.schema));
  EXPECT_EQ(to_json(back), to_json(a.schema));
}

TEST(Instrument, ExcludingEverythingWarns) {
  auto ins = instrument(parse("fn main() { work(1); }"), InstrumentConfig{5, true, true, {"main"}});
  EXPECT_TRUE(ins.schema.features.empty());
  EXPECT_EQ(ins.warnings.size(), 1u);
}

TEST(Instrument, RejectsReservedNames) {
  EXPECT_THROW(instrument(parse("global int mantis_x; fn main() { }")), mantis::UserError);
}

// Outputs, trap flag and cost are unchanged; loop and branch features obey
// their counting laws.
TEST(InstrumentProperty, TransparencyOnRandomPrograms) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    mantis::testgen::ProgramGen gen(seed);
    const std::string src = gen.program();
    Program p = parse(src);
    auto ins = instrument(p);
    for (int k = 0; k < 10; ++k) {
      InputRecord in = gen.input();
      RunResult a = interpret(p, in);
      RunResult b = interpret(ins.program, in);
      ASSERT_EQ(a.outputs, b.outputs) << src;
      ASSERT_EQ(a.cost, b.cost) << src;
      ASSERT_EQ(a.trapped, b.trapped) << src;
      auto fv = feature_vector(ins.schema, b);
      for (std::size_t i = 0; i < fv.size(); ++i)
        if (ins.schema.features[i].kind != FeatureKind::VarVersion) {
          ASSERT_GE(fv[i], 0);
        }
    }
  }
}

TEST(InstrumentProperty, ForLoopFeatureEqualsTripCount) {
  auto ins = instrument(parse("fn main() { int n = readInt(); for i in 0..n { work(1); } }"));
  auto loops = of_kind(ins.schema, FeatureKind::Loop);
  ASSERT_EQ(loops.size(), 1u);
  for (int n = 0; n < 30; n += 3)
    EXPECT_EQ(values(ins, {static_cast<double>(n)})[loops[0]->id], n);
}

TEST(InstrumentProperty, BranchComplement) {
  // then + else equals the number of times the condition is evaluated,
  // which the loop counter of the enclosing loop gives here.
  auto ins = instrument(parse(R"(
fn main() {
  while (!eof()) {
    int c = readInt();
    if (c % 3 == 0) { work(1); } else if (c % 3 == 1) { work(2); }
  }
})"));
  auto br = of_kind(ins.schema, FeatureKind::Branch);
  auto loops = of_kind(ins.schema, FeatureKind::Loop);
  ASSERT_EQ(br.size(), 4u);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> in(rng() % 12);
    for (auto &x : in)
      x = static_cast<double>(rng() % 10);
    auto v = values(ins, in);
    EXPECT_EQ(v[br[0]->id] + v[br[1]->id], v[loops[0]->id]);
    EXPECT_EQ(v[br[2]->id] + v[br[3]->id], v[br[1]->id]);
  }
}

TEST(Prune, UnchangedWhenWithinBudget) {
  auto ins = instrument(parse(kReadLoop));
  SiteProfile prof;
  prof.hits.assign(static_cast<std::size_t>(ins.program.probe_site_count), 1);
  prof.total_cost = 1000;
  auto pr = prune_instrumentation(ins.program, ins.schema, prof, 0.05);
  EXPECT_TRUE(pr.removed_sites.empty());
  EXPECT_EQ(to_source(pr.program), to_source(ins.program));
  EXPECT_EQ(pr.schema.ids(), ins.schema.ids());
}

TEST(Prune, OneHotProfileRemovesExactlyThatSite) {
  auto ins = instrument(parse(kReadLoop));
  const auto sites = probe_sites(ins.program, ins.schema);
  for (std::size_t hot = 0; hot < sites.size(); ++hot) {
    SiteProfile prof;
    prof.hits.assign(sites.size(), 0);
    prof.hits[hot] = 80;
    prof.total_cost = 1000;
    auto pr = prune_instrumentation(ins.program, ins.schema, prof, 0.05);
    ASSERT_EQ(pr.removed_sites, std::vector<int>{static_cast<int>(hot)});
    EXPECT_EQ(pr.program.probe_site_count, ins.program.probe_site_count - 1);
    for (const auto &id : sites[hot].features) {
      bool written_elsewhere = false;
      for (std::size_t other = 0; other < sites.size(); ++other)
        if (other != hot && std::count(sites[other].features.begin(), sites[other].features.end(), id))
          written_elsewhere = true;
      EXPECT_EQ(pr.schema.find(id) >= 0, written_elsewhere) << id;
    }
  }
}

TEST(Prune, GreedyOrderMatchesBruteForce) {
  // Brute force: the smallest prefix of sites sorted by descending hits
  // (ties by index) that brings the overhead within budget.
  auto ins = instrument(parse(R"(
fn main() {
  int total = 0;
  while (!eof()) {
    int n = readInt();
    for i in 0..n { total = total + i; if (i % 2 == 0) { work(1); } }
  }
  print(total);
})"));
  const std::size_t nsites = static_cast<std::size_t>(ins.program.probe_site_count);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 40; ++t) {
    SiteProfile prof;
    prof.hits.resize(nsites);
    std::uint64_t sum = 0;
    for (auto &h : prof.hits)
      sum += (h = rng() % 50);
    prof.total_cost = 400 + rng() % 600;
    const double budget = 0.01 + 0.1 * static_cast<double>(rng() % 10) / 10.0;
    std::vector<int> order(nsites);
    for (std::size_t i = 0; i < nsites; ++i)
      order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return prof.hits[static_cast<std::size_t>(a)] > prof.hits[static_cast<std::size_t>(b)];
    });
    std::vector<int> expected;
    std::uint64_t left = sum;
    for (int s : order) {
      if (static_cast<double>(left) / static_cast<double>(prof.total_cost) <= budget) break;
      if (prof.hits[static_cast<std::size_t>(s)] == 0) break;
      expected.push_back(s);
      left -= prof.hits[static_cast<std::size_t>(s)];
    }
    auto pr = prune_instrumentation(ins.program, ins.schema, prof, budget);
    EXPECT_EQ(pr.removed_sites, expected);
    EXPECT_LE(pr.overhead_after, budget + 1e-12);
  }
}

TEST(Prune, MeasuredProfileBringsOverheadUnderBudget) {
  auto ins = instrument(parse(kReadLoop));
  std::vector<InputRecord> inputs = {{{5, 9, 2}}, {{1, 1}}, {{12}}};
  auto prof = collect_site_profile(ins.program, inputs);
  auto pr = prune_instrumentation(ins.program, ins.schema, prof, 0.05);
  EXPECT_GT(pr.overhead_before, 0.05);
  EXPECT_LE(pr.overhead_after, 0.05);
  // The pruned program is still transparent.
  Program p = parse(kReadLoop);
  for (const auto &in : inputs)
    EXPECT_EQ(interpret(p, in).cost, interpret(pr.program, in).cost);
}
