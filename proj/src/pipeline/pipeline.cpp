#include "mantis/pipeline/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mantis/lang/parser.hpp"
#include "mantis/lang/printer.hpp"
#include "mantis/slicer/slicer.hpp"

namespace mantis::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;
using lang::InputRecord;
using lang::Program;

const char *to_string(RejectReason r) {
  switch (r) {
  case RejectReason::Expensive: return "expensive";
  case RejectReason::Unsound: return "unsound";
  }
  return "?";
}

FeedbackError::FeedbackError(const std::string &message, std::vector<FeedbackIteration> log)
    : Error(message), log_(std::move(log)) {}

EvaluatorError::EvaluatorError(std::string feature, const std::string &message)
    : Error("evaluator for " + feature + ": " + message), feature_(std::move(feature)) {}

namespace {

struct Verdict {
  bool accepted = false;
  Rejection rejection;
  double mean_ratio = 0;
  Program evaluator;
};

Verdict judge(const Program &instrumented, const slicer::SystemDependenceGraph &sdg,
              const instrument::FeatureDecl &feature, const std::vector<InputRecord> &train, double tau) {
  Verdict v;
  v.rejection.feature = feature.id;
  const slicer::SliceCriterion crit{feature.global};
  slicer::Slice s = slicer::slice_program(instrumented, sdg, crit);
  try {
    const slicer::CostReport r = slicer::slice_cost(s.program, instrumented, train, crit);
    v.mean_ratio = r.mean_ratio;
    if (r.compared > 0 && r.mean_ratio > tau) {
      v.rejection.reason = RejectReason::Expensive;
      v.rejection.mean_ratio = r.mean_ratio;
      return v;
    }
  } catch (const slicer::UnsoundSliceError &e) {
    v.rejection.reason = RejectReason::Unsound;
    v.rejection.detail = e.what();
    return v;
  }
  v.accepted = true;
  v.evaluator = std::move(s.program);
  return v;
}

} // namespace

PredictorBundle run_pipeline(const Program &program, const std::vector<InputRecord> &inputs,
                             const PipelineConfig &config, const std::vector<std::string> &input_names) {
  if (!(config.tau > 0 && config.tau < 1)) throw UserError("tau must lie in (0, 1)");
  if (inputs.size() < 10) throw UserError("the pipeline needs at least 10 inputs");
  if (!input_names.empty() && input_names.size() != inputs.size())
    throw UserError("input names do not match inputs");

  std::vector<std::string> names = input_names;
  if (names.empty())
    for (std::size_t i = 0; i < inputs.size(); ++i)
      names.push_back("input-" + std::to_string(i));
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!index_of.emplace(names[i], i).second) throw UserError("duplicate input name " + names[i]);

  instrument::Instrumented inst = instrument::instrument(program, config.instrument);
  if (config.overhead_budget > 0) {
    const auto sites = instrument::collect_site_profile(inst.program, inputs);
    auto pruned = instrument::prune_instrumentation(inst.program, inst.schema, sites, config.overhead_budget);
    inst.program = std::move(pruned.program);
    inst.schema = std::move(pruned.schema);
  }
  const profile::Dataset data = profile::profile_batch(inst.program, inst.schema, inputs, config.profile, names);
  if (data.n() < 3) throw UserError("too few successful profiling runs");
  const model::Split split = model::split_rows(data.n(), config.model.train_fraction, config.model.seed);

  std::vector<InputRecord> train;
  for (std::size_t r : split.train)
    train.push_back(inputs[index_of.at(data.provenance[r].input)]);

  const slicer::SystemDependenceGraph sdg = slicer::build_sliceable_sdg(inst.program);
  std::map<std::string, Verdict> verdicts;
  std::vector<std::string> excluded;
  const int limit = config.max_feedback_iterations >= 0 ? config.max_feedback_iterations
                                                        : static_cast<int>(data.m());

  PredictorBundle bundle;
  bundle.schema = inst.schema;
  bundle.tau = config.tau;
  for (int iteration = 0;; ++iteration) {
    if (iteration > limit)
      throw FeedbackError("no acceptable model after " + std::to_string(limit) + " feedback iterations",
                          bundle.log);
    model::SparseModel m = model::fit_on_split(data.without_columns(excluded), split, config.model);

    FeedbackIteration step;
    step.selected = m.selected_features;
    for (const std::string &id : m.selected_features) {
      auto it = verdicts.find(id);
      if (it == verdicts.end()) {
        const int k = inst.schema.find(id);
        if (k < 0) throw InternalError("model selected unknown feature " + id);
        it = verdicts.emplace(id, judge(inst.program, sdg, inst.schema.features[static_cast<std::size_t>(k)],
                                        train, config.tau))
                 .first;
      }
      if (it->second.accepted) step.accepted_ratios[id] = it->second.mean_ratio;
      else step.rejected.push_back(it->second.rejection);
    }
    bundle.log.push_back(step);
    if (step.rejected.empty()) {
      for (const std::string &id : m.selected_features)
        bundle.evaluators.emplace(id, verdicts.at(id).evaluator);
      bundle.model = std::move(m);
      return bundle;
    }
    for (const Rejection &r : step.rejected)
      excluded.push_back(r.feature);
  }
}

OnlinePrediction online_predict(const PredictorBundle &bundle, const InputRecord &input) {
  OnlinePrediction out;
  for (const std::string &id : bundle.model.selected_features) {
    const int k = bundle.schema.find(id);
    auto ev = bundle.evaluators.find(id);
    if (k < 0 || ev == bundle.evaluators.end()) throw InternalError("bundle lacks an evaluator for " + id);
    const std::string &global = bundle.schema.features[static_cast<std::size_t>(k)].global;
    lang::RunResult r;
    try {
      r = lang::interpret(ev->second, input);
    } catch (const lang::RuntimeError &e) {
      throw EvaluatorError(id, e.what());
    }
    auto g = r.globals.find(global);
    if (g == r.globals.end()) throw InternalError("evaluator for " + id + " lacks global " + global);
    out.features[id] = g->second.to_number();
    out.evaluator_cost += r.cost;
  }
  out.predicted_cost = model::predict(bundle.model, out.features);
  return out;
}

std::string rejection_log_json(const PredictorBundle &bundle) {
  json j;
  j["tau"] = bundle.tau;
  j["iterations"] = json::array();
  for (std::size_t i = 0; i < bundle.log.size(); ++i) {
    const FeedbackIteration &it = bundle.log[i];
    json step;
    step["step"] = i + 1;
    step["selected"] = it.selected;
    step["rejected"] = json::array();
    for (const Rejection &r : it.rejected) {
      json rj = {{"feature", r.feature}, {"reason", to_string(r.reason)}};
      if (r.reason == RejectReason::Expensive) rj["meanRatio"] = r.mean_ratio;
      if (!r.detail.empty()) rj["detail"] = r.detail;
      step["rejected"].push_back(rj);
    }
    step["accepted"] = json::object();
    for (const auto &[id, ratio] : it.accepted_ratios)
      step["accepted"][id] = ratio;
    j["iterations"].push_back(step);
  }
  return j.dump(2) + "\n";
}

namespace {

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UserError("cannot write " + path.string());
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

void write_bundle(const PredictorBundle &bundle, const std::string &dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "evaluators", ec);
  if (ec) throw UserError("cannot create " + (root / "evaluators").string() + ": " + ec.message());
  write_text(root / "model.json", model::to_json(bundle.model));
  write_text(root / "schema.json", instrument::to_json(bundle.schema));
  write_text(root / "rejection_log.json", rejection_log_json(bundle));
  for (const auto &[id, prog] : bundle.evaluators)
    write_text(root / "evaluators" / (id + ".mimp"), lang::to_source(prog));
}

PredictorBundle read_bundle(const std::string &dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw UserError("bundle directory not found: " + dir);
  PredictorBundle b;
  b.model = model::model_from_json(read_text(root / "model.json"));
  b.schema = instrument::schema_from_json(read_text(root / "schema.json"));
  try {
    const json log = json::parse(read_text(root / "rejection_log.json"));
    b.tau = log.at("tau").get<double>();
    for (const auto &step : log.at("iterations")) {
      FeedbackIteration it;
      it.selected = step.at("selected").get<std::vector<std::string>>();
      for (const auto &r : step.at("rejected")) {
        Rejection rej;
        rej.feature = r.at("feature").get<std::string>();
        rej.reason = r.at("reason").get<std::string>() == "unsound" ? RejectReason::Unsound : RejectReason::Expensive;
        rej.mean_ratio = r.value("meanRatio", 0.0);
        rej.detail = r.value("detail", std::string());
        it.rejected.push_back(rej);
      }
      for (const auto &[id, ratio] : step.at("accepted").items())
        it.accepted_ratios[id] = ratio.get<double>();
      b.log.push_back(std::move(it));
    }
  } catch (const json::exception &e) {
    throw UserError("malformed rejection_log.json: " + std::string(e.what()));
  }
  for (const std::string &id : b.model.selected_features) {
    const fs::path p = root / "evaluators" / (id + ".mimp");
    b.evaluators.emplace(id, lang::parse(read_text(p)));
  }
  return b;
}

} // namespace mantis::pipeline
