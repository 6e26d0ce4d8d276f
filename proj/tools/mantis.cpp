// Command-line front end: one subcommand per pipeline stage plus the
// end-to-end run. Exit codes: 0 success, 1 user error, 2 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mantis/bench/bench.hpp"
#include "mantis/instrument/instrument.hpp"
#include "mantis/lang/parser.hpp"
#include "mantis/lang/printer.hpp"
#include "mantis/model/model.hpp"
#include "mantis/pipeline/pipeline.hpp"
#include "mantis/profile/profile.hpp"
#include "mantis/slicer/slicer.hpp"

namespace fs = std::filesystem;
using namespace mantis;

namespace {

std::uint64_t default_seed() {
  if (const char *s = std::getenv("MANTIS_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception &) {
      throw UserError(std::string("MANTIS_SEED is not a number: ") + s);
    }
  }
  return 42;
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UserError("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
}

void require_file(const std::string &path) {
  if (!fs::is_regular_file(path)) throw UserError("file not found: " + path);
}

// schema.json next to an instrumented program unless given explicitly.
instrument::FeatureSchema load_schema(const std::string &instr, const std::string &explicit_path) {
  const std::string path =
      explicit_path.empty() ? (fs::path(instr).parent_path() / "schema.json").string() : explicit_path;
  require_file(path);
  return instrument::schema_from_json(read_text(path));
}

std::string stem_of(const std::string &path) {
  std::string s = fs::path(path).stem().string();
  if (s.size() > 6 && s.substr(s.size() - 6) == ".instr") s.resize(s.size() - 6);
  return s;
}

struct ModelFlags {
  int degree = 3;
  double lambda = 0.03;
  double lambda_abs = -1;
  double train_frac = 0.1;
  std::uint64_t seed = 0;

  void add(CLI::App *c) {
    c->add_option("--degree", degree, "Polynomial degree")->check(CLI::Range(1, 8));
    c->add_option("--lambda", lambda, "Penalty as a fraction of lambda_max")->check(CLI::PositiveNumber);
    c->add_option("--lambda-abs", lambda_abs, "Absolute penalty (overrides --lambda)")->check(CLI::PositiveNumber);
    c->add_option("--train-frac", train_frac, "Training fraction")->check(CLI::Range(0.0, 1.0));
  }

  model::ModelConfig config() const {
    model::ModelConfig m;
    m.degree = degree;
    if (lambda_abs > 0) {
      m.lambda = lambda_abs;
      m.lambda_absolute = true;
    } else {
      m.lambda = lambda;
    }
    m.train_fraction = train_frac;
    m.seed = seed;
    return m;
  }
};

void print_bundle_summary(const pipeline::PredictorBundle &b) {
  for (std::size_t i = 0; i < b.log.size(); ++i) {
    const auto &it = b.log[i];
    std::cout << "step " << i + 1 << ": selected";
    for (const auto &f : it.selected) std::cout << " " << f;
    if (it.selected.empty()) std::cout << " (none)";
    std::cout << "; rejected";
    for (const auto &r : it.rejected) std::cout << " " << r.feature << " (" << pipeline::to_string(r.reason) << ")";
    if (it.rejected.empty()) std::cout << " (none)";
    std::cout << "\n";
  }
  std::cout << model::to_string(b.model);
  std::cout << "test error " << b.model.report.test_error << "\n";
}

int run(int argc, char **argv) {
  CLI::App app{"Performance prediction from program features"};
  app.require_subcommand(1);
  const std::uint64_t seed0 = default_seed();

  // instrument
  auto *ins = app.add_subcommand("instrument", "Add feature probes to a program");
  std::string ins_prog, ins_out = ".";
  int versions = 5;
  bool no_locals = false, no_globals = false;
  ins->add_option("program", ins_prog, "MiniImp source")->required();
  ins->add_option("-k", versions, "Versions recorded per variable")->check(CLI::PositiveNumber);
  ins->add_flag("--no-locals", no_locals, "Do not track local variables");
  ins->add_flag("--no-globals", no_globals, "Do not track global variables");
  ins->add_option("-o", ins_out, "Output directory");

  // profile
  auto *prof = app.add_subcommand("profile", "Run an instrumented program over an input corpus");
  std::string prof_prog, prof_inputs, prof_schema, prof_out = "profile.csv";
  double noise = 0;
  std::uint64_t prof_seed = seed0;
  int jobs = 1;
  prof->add_option("instrumented", prof_prog, "Instrumented program")->required();
  prof->add_option("--inputs", prof_inputs, "Input directory")->required();
  prof->add_option("--schema", prof_schema, "Feature schema (default: schema.json beside the program)");
  prof->add_option("--noise", noise, "Relative noise sigma")->check(CLI::NonNegativeNumber);
  prof->add_option("--seed", prof_seed, "Noise seed");
  prof->add_option("-j", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  prof->add_option("-o", prof_out, "Output CSV");

  // train
  auto *train = app.add_subcommand("train", "Fit a sparse polynomial model to a profile");
  std::string train_csv, train_out = "model.json";
  ModelFlags train_flags;
  train_flags.seed = seed0;
  bool sweep = false;
  train->add_option("csv", train_csv, "Profile CSV")->required();
  train_flags.add(train);
  train->add_option("--seed", train_flags.seed, "Split seed");
  train->add_flag("--sweep", sweep, "Also write lambda and training-size sweep CSVs");
  train->add_option("-o", train_out, "Output model");

  // slice
  auto *sl = app.add_subcommand("slice", "Extract the evaluator of one feature");
  std::string sl_prog, sl_feature, sl_schema, sl_inputs, sl_out = ".";
  sl->add_option("instrumented", sl_prog, "Instrumented program")->required();
  sl->add_option("--feature", sl_feature, "Feature id")->required();
  sl->add_option("--schema", sl_schema, "Feature schema (default: schema.json beside the program)");
  sl->add_option("--inputs", sl_inputs, "Input directory for a cost report");
  sl->add_option("-o", sl_out, "Output directory");

  // pipeline
  auto *pipe = app.add_subcommand("pipeline", "Instrument, profile, fit and slice with feedback");
  std::string pipe_prog, pipe_inputs, pipe_out = "bundle";
  pipeline::PipelineConfig pcfg;
  ModelFlags pipe_flags;
  pipe_flags.seed = seed0;
  std::uint64_t pipe_seed = seed0;
  int pipe_versions = 5;
  pipe->add_option("program", pipe_prog, "MiniImp source")->required();
  pipe->add_option("--inputs", pipe_inputs, "Input directory")->required();
  pipe->add_option("--tau", pcfg.tau, "Largest accepted evaluator cost ratio")->check(CLI::Range(0.0, 1.0));
  pipe_flags.add(pipe);
  pipe->add_option("--noise", pcfg.profile.noise_sigma, "Relative noise sigma")->check(CLI::NonNegativeNumber);
  pipe->add_option("--seed", pipe_seed, "Seed for noise and split");
  pipe->add_option("-k", pipe_versions, "Versions recorded per variable")->check(CLI::PositiveNumber);
  pipe->add_option("--budget", pcfg.overhead_budget, "Instrumentation overhead budget (0: keep all probes)")
      ->check(CLI::Range(0.0, 1.0));
  pipe->add_option("--max-iterations", pcfg.max_feedback_iterations, "Feedback iteration limit");
  pipe->add_option("-j", pcfg.profile.parallelism, "Parallel profiling runs")->check(CLI::PositiveNumber);
  pipe->add_option("-o", pipe_out, "Bundle directory");

  // predict
  auto *pred = app.add_subcommand("predict", "Predict the cost of one input with a bundle");
  std::string pred_bundle, pred_input;
  pred->add_option("bundle", pred_bundle, "Bundle directory")->required();
  pred->add_option("input", pred_input, "Input file")->required();

  // gen-inputs
  auto *gen = app.add_subcommand("gen-inputs", "Write random inputs for a bundled benchmark");
  std::string gen_name, gen_out;
  std::size_t gen_count = 100;
  std::uint64_t gen_seed = seed0;
  std::string gen_source;
  gen->add_option("benchmark", gen_name, "Benchmark name")->required();
  gen->add_option("-n", gen_count, "Number of inputs")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--source", gen_source, "Also write the program source to this file");
  gen->add_option("-o", gen_out, "Output directory")->required();

  auto *list = app.add_subcommand("list", "List bundled benchmarks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*ins) {
    require_file(ins_prog);
    instrument::InstrumentConfig cfg;
    cfg.versions_per_variable = versions;
    cfg.track_locals = !no_locals;
    cfg.track_globals = !no_globals;
    const auto r = instrument::instrument(lang::parse_file(ins_prog), cfg);
    for (const auto &w : r.warnings) std::cerr << "warning: " << w << "\n";
    write_text(fs::path(ins_out) / (stem_of(ins_prog) + ".instr.mimp"), lang::to_source(r.program));
    write_text(fs::path(ins_out) / "schema.json", instrument::to_json(r.schema));
    std::cout << r.schema.features.size() << " features\n";
  } else if (*prof) {
    require_file(prof_prog);
    const auto schema = load_schema(prof_prog, prof_schema);
    const auto corpus = profile::read_corpus(prof_inputs);
    profile::ProfileConfig cfg;
    cfg.noise_sigma = noise;
    cfg.seed = prof_seed;
    cfg.parallelism = jobs;
    const auto data = profile::profile_batch(lang::parse_file(prof_prog), schema, corpus.inputs, cfg, corpus.names);
    profile::write_dataset(data, cfg, prof_out);
    std::cout << "wrote " << prof_out << ": " << data.n() << " rows, " << data.m() << " features, "
              << data.failed.size() << " failed runs\n";
  } else if (*train) {
    require_file(train_csv);
    const auto data = profile::read_dataset(train_csv);
    const auto cfg = train_flags.config();
    const auto m = model::select_and_fit(data, cfg);
    for (const auto &w : m.report.warnings) std::cerr << "warning: " << w << "\n";
    write_text(train_out, model::to_json(m));
    std::cout << model::to_string(m);
    std::cout << "train error " << m.report.train_error << ", test error " << m.report.test_error << "\n";
    if (sweep) {
      const fs::path dir = fs::path(train_out).parent_path();
      std::ostringstream lam;
      lam << "lambda_fraction,lambda,selected,terms,test_error\n";
      for (const auto &p : m.report.lambda_path)
        lam << p.fraction << "," << p.lambda << "," << p.selected << "," << p.terms << "," << p.test_error << "\n";
      write_text(dir / "lambda_sweep.csv", lam.str());
      std::ostringstream ts;
      ts << "train_fraction,train_rows,selected,test_error\n";
      for (const auto &p : model::training_size_sweep(data, cfg, {0.05, 0.1, 0.2, 0.3, 0.4}))
        ts << p.train_fraction << "," << p.train_rows << "," << p.selected << "," << p.test_error << "\n";
      write_text(dir / "train_size_sweep.csv", ts.str());
    }
  } else if (*sl) {
    require_file(sl_prog);
    const auto schema = load_schema(sl_prog, sl_schema);
    const int k = schema.find(sl_feature);
    if (k < 0) throw UserError("unknown feature: " + sl_feature);
    const auto prog = lang::parse_file(sl_prog);
    const auto sdg = slicer::build_sliceable_sdg(prog);
    const slicer::SliceCriterion crit{schema.features[static_cast<std::size_t>(k)].global};
    const auto s = slicer::slice_program(prog, sdg, crit);
    for (const auto &w : s.warnings) std::cerr << "warning: " << w << "\n";
    slicer::CostReport report;
    const slicer::CostReport *rp = nullptr;
    if (!sl_inputs.empty()) {
      report = slicer::slice_cost(s.program, prog, profile::read_corpus(sl_inputs).inputs, crit);
      rp = &report;
      std::cout << "mean cost ratio " << report.mean_ratio << " over " << report.compared << " inputs\n";
    }
    write_text(fs::path(sl_out) / (sl_feature + ".mimp"), lang::to_source(s.program));
    write_text(fs::path(sl_out) / (sl_feature + ".manifest.json"), slicer::manifest_json(s, rp));
  } else if (*pipe) {
    require_file(pipe_prog);
    const auto corpus = profile::read_corpus(pipe_inputs);
    pcfg.instrument.versions_per_variable = pipe_versions;
    pcfg.profile.seed = pipe_seed;
    pcfg.model = pipe_flags.config();
    pcfg.model.seed = pipe_seed;
    if (!(pcfg.tau > 0 && pcfg.tau < 1)) throw UserError("--tau must lie strictly between 0 and 1");
    try {
      const auto b = pipeline::run_pipeline(lang::parse_file(pipe_prog), corpus.inputs, pcfg, corpus.names);
      pipeline::write_bundle(b, pipe_out);
      print_bundle_summary(b);
      std::cout << "wrote bundle " << pipe_out << "\n";
    } catch (const pipeline::FeedbackError &e) {
      pipeline::PredictorBundle partial;
      partial.log = e.log();
      partial.tau = pcfg.tau;
      write_text(fs::path(pipe_out) / "rejection_log.json", pipeline::rejection_log_json(partial));
      throw UserError(e.what());
    }
  } else if (*pred) {
    require_file(pred_input);
    const auto b = pipeline::read_bundle(pred_bundle);
    const auto p = pipeline::online_predict(b, lang::read_input_file(pred_input));
    for (const auto &[id, v] : p.features) std::cout << id << " = " << v << "\n";
    std::cout << "predicted cost " << p.predicted_cost << "\n";
    std::cout << "evaluator cost " << p.evaluator_cost << "\n";
  } else if (*gen) {
    const auto &b = bench::find_benchmark(gen_name);
    bench::write_inputs(bench::generate_inputs(b, gen_count, gen_seed), gen_out);
    if (!gen_source.empty()) write_text(gen_source, b.source);
    std::cout << "wrote " << gen_count << " inputs to " << gen_out << "\n";
  } else if (*list) {
    for (const auto &b : bench::benchmarks()) std::cout << b.name << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const UserError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InternalError &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
