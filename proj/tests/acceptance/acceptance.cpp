// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kkt.hpp"
#include "sdg_oracle.hpp"
#include "mantis/bench/bench.hpp"
#include "mantis/instrument/instrument.hpp"
#include "mantis/lang/interpreter.hpp"
#include "mantis/lang/parser.hpp"
#include "mantis/model/model.hpp"
#include "mantis/pipeline/pipeline.hpp"
#include "mantis/profile/profile.hpp"
#include "mantis/slicer/slicer.hpp"

namespace {

using namespace mantis;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

pipeline::PipelineConfig accuracy_config() {
  pipeline::PipelineConfig c;
  c.profile.noise_sigma = 0.02;
  c.model.train_fraction = 0.10;
  c.model.degree = 3;
  c.model.lambda = 0.03;
  return c;
}

const lang::Program &program_of(const std::string &name) {
  static std::map<std::string, lang::Program> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, lang::parse(bench::find_benchmark(name).source)).first;
  return it->second;
}

const std::vector<lang::InputRecord> &gridwork_inputs() {
  static const auto inputs = bench::generate_inputs(bench::find_benchmark("gridwork"), 300, 42);
  return inputs;
}

Verdict accuracy() {
  const auto start = std::chrono::steady_clock::now();
  const auto b = pipeline::run_pipeline(program_of("gridwork"), gridwork_inputs(), accuracy_config());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double err = b.model.report.test_error;
  return {err <= 0.07 && seconds <= 60,
          "gridwork error " + fmt("%.2f%%", 100 * err) + ", runtime " + fmt("%.2f s", seconds) +
              ", feedback steps " + std::to_string(b.log.size())};
}

Verdict blackbox() {
  const bench::Benchmark &g2 = bench::find_benchmark("gridwork2");
  const auto inputs = bench::generate_inputs(g2, 300, 42);
  const pipeline::PipelineConfig c = accuracy_config();
  const auto b = pipeline::run_pipeline(program_of("gridwork2"), inputs, c);

  // Same runs and noise, with the image size as the only column.
  const instrument::Instrumented inst = instrument::instrument(program_of("gridwork2"));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < inputs.size(); ++i) names.push_back(std::to_string(i));
  const profile::Dataset full = profile::profile_batch(inst.program, inst.schema, inputs, c.profile, names);
  profile::Dataset size_only;
  size_only.feature_ids = {"input:size"};
  size_only.y = full.y;
  size_only.provenance = full.provenance;
  for (const auto &row : full.provenance) {
    const std::size_t i = std::stoul(row.input);
    size_only.x.push_back({inputs[i].values[0]});
  }
  const auto split = model::split_rows(size_only.n(), c.model.train_fraction, c.model.seed);
  const auto m = model::fit_on_split(size_only, split, c.model);
  const double ratio = m.report.test_error / b.model.report.test_error;
  return {ratio >= 3, "size-only error " + fmt("%.2f%%", 100 * m.report.test_error) + ", pipeline error " +
                          fmt("%.2f%%", 100 * b.model.report.test_error) + ", ratio " + fmt("%.1fx", ratio)};
}

Verdict lambda_range() {
  std::vector<double> errors;
  std::ostringstream detail;
  // The model's own lambda path grid (20 log-spaced fractions of lambda_max
  // in [1e-3, 1]) cut at 0.07, plus 0.07 itself.
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) {
    const double f = std::pow(10.0, -3.0 + 3.0 * i / 19);
    if (f < 0.07) grid.push_back(f);
  }
  grid.push_back(0.07);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lambda = grid[i];
    pipeline::PipelineConfig c = accuracy_config();
    c.model.lambda = lambda;
    const auto b = pipeline::run_pipeline(program_of("gridwork"), gridwork_inputs(), c);
    errors.push_back(b.model.report.test_error);
    detail << (i ? ", " : "") << fmt("%.2g", lambda) << ":" << fmt("%.2f%%", 100 * errors.back());
  }
  const double best = *std::min_element(errors.begin(), errors.end());
  const double worst = *std::max_element(errors.begin(), errors.end());
  return {worst - best <= 0.02, "spread " + fmt("%.2f", 100 * (worst - best)) + " points (" + detail.str() + ")"};
}

Verdict training_size() {
  bool ok = true;
  std::ostringstream detail;
  for (double f : {0.05, 0.1, 0.2, 0.3, 0.4}) {
    pipeline::PipelineConfig c = accuracy_config();
    c.model.train_fraction = f;
    const auto b = pipeline::run_pipeline(program_of("gridwork"), gridwork_inputs(), c);
    ok = ok && b.model.report.test_error <= 0.10;
    detail << (f == 0.05 ? "" : ", ") << f << ":" << fmt("%.2f%%", 100 * b.model.report.test_error);
  }
  return {ok, detail.str()};
}

Verdict lasso_kkt() {
  std::mt19937_64 rng(2024);
  double worst = 0;
  bool zero_ok = true;
  for (int t = 0; t < 100; ++t) {
    const auto inst = testgen::sparse_instance(rng, 100, 20, 3, 0.01);
    const double lmax = model::lambda_max(inst.x, inst.y);
    const double lambda = lmax * (t % 2 ? 0.01 : 0.1);
    const auto r = model::lasso_fit(inst.x, inst.y, lambda);
    worst = std::max(worst, testgen::kkt_violation(inst.x, inst.y, lambda, r.intercept, r.beta));
    for (double over : {1.0, 1.5}) {
      const auto z = model::lasso_fit(inst.x, inst.y, lmax * over);
      for (Eigen::Index j = 0; j < z.beta.size(); ++j) zero_ok = zero_ok && z.beta(j) == 0.0;
    }
  }
  return {worst <= 1e-6 && zero_ok, "max KKT violation " + fmt("%.2e", worst) +
                                        (zero_ok ? ", zero at lambda_max" : ", nonzero at lambda_max")};
}

std::size_t brute_force_terms(std::size_t k, int d) {
  std::size_t count = 0;
  std::vector<int> e(k, 0);
  std::function<void(std::size_t, int)> go = [&](std::size_t i, int left) {
    if (i == k) {
      ++count;
      return;
    }
    for (int p = 0; p <= left; ++p) go(i + 1, left - p);
  };
  go(0, d);
  return count;
}

Verdict expansion() {
  int checked = 0;
  for (std::size_t k = 1; k <= 6; ++k)
    for (int d = 1; d <= 4; ++d) {
      const std::size_t want = brute_force_terms(k, d);
      if (model::expansion_size(k, d) != want || model::poly_expand(k, d).size() != want)
        return {false, "mismatch at k=" + std::to_string(k) + ", d=" + std::to_string(d)};
      ++checked;
    }
  return {true, std::to_string(checked) + " (k, d) pairs"};
}

Verdict soundness() {
  std::size_t programs = 0, evaluators = 0, mismatches = 0, comparisons = 0;
  std::string first;
  for (const bench::Benchmark &b : bench::benchmarks()) {
    const auto inputs = bench::generate_inputs(b, 100, 17);
    const instrument::Instrumented inst = instrument::instrument(lang::parse(b.source));
    const auto sdg = slicer::build_sliceable_sdg(inst.program);
    ++programs;
    for (const auto &f : inst.schema.features) {
      const slicer::SliceCriterion crit{f.global};
      const slicer::Slice s = slicer::slice_program(inst.program, sdg, crit);
      ++evaluators;
      try {
        comparisons += slicer::slice_cost(s.program, inst.program, inputs, crit).compared;
      } catch (const slicer::UnsoundSliceError &e) {
        if (first.empty()) first = b.name + " " + f.id + ": " + e.what();
        ++mismatches;
      }
    }
  }
  std::string detail = std::to_string(programs) + " programs, " + std::to_string(evaluators) + " evaluators, " +
                       std::to_string(comparisons) + " comparisons, " + std::to_string(mismatches) + " mismatches";
  if (!first.empty()) detail += " (first: " + first + ")";
  return {programs >= 12 && mismatches == 0, detail};
}

Verdict economy() {
  const bench::Benchmark &rl = bench::find_benchmark("readloop");
  const instrument::Instrumented inst = instrument::instrument(lang::parse(rl.source));
  const auto sdg = slicer::build_sliceable_sdg(inst.program);
  const auto inputs = bench::generate_inputs(rl, 100, 42);
  double worst = -1;
  std::string id;
  for (const auto &f : inst.schema.features) {
    if (f.kind != instrument::FeatureKind::Loop || f.function != "main") continue;
    const slicer::SliceCriterion crit{f.global};
    const auto r = slicer::slice_cost(slicer::slice_program(inst.program, sdg, crit).program, inst.program, inputs,
                                      crit);
    if (r.mean_ratio > worst) {
      worst = r.mean_ratio;
      id = f.id;
    }
  }
  if (worst < 0) return {false, "no loop counter in main"};
  return {worst <= 0.10, id + " mean ratio " + fmt("%.4f", worst)};
}

Verdict summaries() {
  std::size_t small = 0, edges = 0;
  for (const bench::Benchmark &b : bench::benchmarks()) {
    for (const lang::Program &p : {lang::parse(b.source), instrument::instrument(lang::parse(b.source)).program}) {
      slicer::SystemDependenceGraph g = slicer::build_sdg(p);
      if (g.size() > 40) continue;
      slicer::add_summary_edges(g);
      ++small;
      const auto installed = testgen::installed_summaries(g);
      edges += installed.size();
      if (installed != testgen::brute_force_summaries(g)) return {false, "mismatch on " + b.name};
    }
  }
  return {small > 0, std::to_string(small) + " graphs with <= 40 vertices, " + std::to_string(edges) +
                         " summary edges, all equal"};
}

Verdict feedback() {
  const bench::Benchmark &fb = bench::find_benchmark("feedback");
  pipeline::PipelineConfig c;
  c.profile.noise_sigma = 0.02;
  const auto b = pipeline::run_pipeline(program_of("feedback"), bench::generate_inputs(fb, 300, 42), c);
  std::ostringstream detail;
  for (std::size_t i = 0; i < b.log.size(); ++i) {
    detail << (i ? "; " : "") << "step " << i + 1 << ": " << b.log[i].selected.size() << " selected, "
           << b.log[i].rejected.size() << " rejected";
    for (const auto &r : b.log[i].rejected) detail << " " << r.feature << fmt(" (%.2f)", r.mean_ratio);
  }
  const bool ok = b.log.size() == 2 && !b.log[0].rejected.empty() && b.log[1].rejected.empty() &&
                  !b.log[1].selected.empty();
  return {ok, detail.str()};
}

Verdict transparency() {
  std::size_t runs = 0, diffs = 0;
  std::string first;
  for (const bench::Benchmark &b : bench::benchmarks()) {
    const lang::Program original = lang::parse(b.source);
    const lang::Program inst = instrument::instrument(original).program;
    for (const lang::InputRecord &in : bench::generate_inputs(b, 100, 23)) {
      const lang::RunResult x = lang::interpret(original, in);
      const lang::RunResult y = lang::interpret(inst, in);
      ++runs;
      if (x.outputs != y.outputs || x.cost != y.cost || x.trapped != y.trapped) {
        ++diffs;
        if (first.empty()) first = b.name + " on " + lang::format_input(in);
      }
    }
  }
  return {diffs == 0, std::to_string(runs) + " runs, " + std::to_string(diffs) + " differences" +
                          (first.empty() ? "" : " (first: " + first + ")")};
}

} // namespace

int main() {
  const std::vector<std::pair<const char *, Verdict (*)()>> criteria = {
      {"end-to-end accuracy", accuracy},
      {"blackbox contrast", blackbox},
      {"lambda insensitivity", lambda_range},
      {"training-size insensitivity", training_size},
      {"lasso optimality", lasso_kkt},
      {"expansion count", expansion},
      {"slice soundness", soundness},
      {"slice economy", economy},
      {"summary-edge oracle", summaries},
      {"feedback-loop replay", feedback},
      {"instrumentation transparency", transparency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception &e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
