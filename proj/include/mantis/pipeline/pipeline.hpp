#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mantis/error.hpp"
#include "mantis/instrument/instrument.hpp"
#include "mantis/lang/ast.hpp"
#include "mantis/model/model.hpp"
#include "mantis/profile/profile.hpp"

namespace mantis::pipeline {

struct PipelineConfig {
  instrument::InstrumentConfig instrument;
  // Prune probe sites to this overhead after a first profiling run; 0 keeps
  // every site.
  double overhead_budget = 0;
  profile::ProfileConfig profile;
  model::ModelConfig model;
  // Largest mean evaluator cost ratio (slice / original) a feature may have.
  double tau = 0.10;
  // Refits allowed after rejections; negative means the feature count.
  int max_feedback_iterations = -1;
};

enum class RejectReason : std::uint8_t { Expensive, Unsound };

const char *to_string(RejectReason r);

struct Rejection {
  std::string feature;
  RejectReason reason = RejectReason::Expensive;
  double mean_ratio = 0; // for Expensive
  std::string detail;
};

struct FeedbackIteration {
  std::vector<std::string> selected;
  std::vector<Rejection> rejected;
  std::map<std::string, double> accepted_ratios;
};

struct PredictorBundle {
  model::SparseModel model;
  // Schema of the instrumented program the evaluators were sliced from.
  instrument::FeatureSchema schema;
  std::map<std::string, lang::Program> evaluators; // keyed by feature id
  std::vector<FeedbackIteration> log;
  double tau = 0.10;
};

// No model with cheap enough features within the iteration limit.
class FeedbackError : public Error {
public:
  FeedbackError(const std::string &message, std::vector<FeedbackIteration> log);
  const std::vector<FeedbackIteration> &log() const { return log_; }

private:
  std::vector<FeedbackIteration> log_;
};

// Instrument, profile, fit, then slice an evaluator for every selected
// feature. Features whose evaluator costs more than tau of the program on
// the training inputs (or whose slice is unsound) have their columns removed
// and the model is refit from scratch, until every selected feature is
// accepted or the model uses no features. Requires a checked program and at
// least 10 inputs.
PredictorBundle run_pipeline(const lang::Program &program, const std::vector<lang::InputRecord> &inputs,
                             const PipelineConfig &config,
                             const std::vector<std::string> &input_names = {});

// Evaluator runtime error on a new input.
class EvaluatorError : public Error {
public:
  EvaluatorError(std::string feature, const std::string &message);
  const std::string &feature() const { return feature_; }

private:
  std::string feature_;
};

struct OnlinePrediction {
  double predicted_cost = 0;
  std::uint64_t evaluator_cost = 0;
  model::FeatureValues features;
};

OnlinePrediction online_predict(const PredictorBundle &bundle, const lang::InputRecord &input);

std::string rejection_log_json(const PredictorBundle &bundle);

// model.json, schema.json, rejection_log.json and evaluators/<id>.mimp.
void write_bundle(const PredictorBundle &bundle, const std::string &dir);
PredictorBundle read_bundle(const std::string &dir);

} // namespace mantis::pipeline
