#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mantis/profile/profile.hpp"

namespace mantis::model {

struct ColumnScale {
  std::string id;
  double min = 0;
  double max = 1;
};

struct NormalizationParams {
  std::vector<ColumnScale> columns;
  std::vector<std::string> dropped_constant;
  // (dropped column, retained representative)
  std::vector<std::pair<std::string, std::string>> dropped_duplicate;
  double y_min = 0;
  double y_max = 1;

  const ColumnScale *find(const std::string &id) const;
  double scale_y(double y) const;
  double unscale_y(double v) const;
};

struct Normalized {
  std::vector<std::string> ids;
  Eigen::MatrixXd x; // n x m, columns in [0,1] on the rows used for fitting
  Eigen::VectorXd y;
};

// Min-max scaling fitted on `fit_rows` (all rows if empty). Zero-range
// columns are dropped as constant; columns identical to an earlier one after
// scaling (max abs difference <= 1e-12) are dropped as duplicates.
std::pair<Normalized, NormalizationParams>
normalize_and_prune(const profile::Dataset &data, const std::vector<std::size_t> &fit_rows = {});

// Applies stored parameters to every row of `data`.
Normalized apply_normalization(const profile::Dataset &data, const NormalizationParams &params);

// Smallest penalty at which every penalized coefficient is zero when the
// intercept is free: max_j |<X_j, y - mean(y)>| / n.
double lambda_max(const Eigen::MatrixXd &x, const Eigen::VectorXd &y);

struct LassoOptions {
  double tolerance = 1e-8;
  long max_sweeps = 100'000;
  bool record_objective = false;
};

struct LassoResult {
  double intercept = 0;
  Eigen::VectorXd beta;
  long sweeps = 0;
  bool converged = false;
  std::vector<double> objective; // after each sweep, if recorded
};

// (1/2n) * ||y - b0 - X b||^2 + lambda * ||b||_1.
double lasso_objective(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, double lambda,
                       double intercept, const Eigen::VectorXd &beta);

// Cyclic coordinate descent with soft thresholding and an unpenalized
// intercept. Converged when a full sweep changes no coefficient by more
// than the tolerance.
LassoResult lasso_fit(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, double lambda,
                      const LassoOptions &options = {});

using MultiIndex = std::vector<int>;

constexpr std::size_t kDefaultExpansionCap = 100'000;

// C(k + d, d), saturating at SIZE_MAX.
std::size_t expansion_size(std::size_t k, int d);

// All exponent vectors over k variables with total degree <= d: by degree,
// then lexicographically descending (x1^2, x1 x2, x2^2, ...).
std::vector<MultiIndex> poly_expand(std::size_t k, int d, std::size_t cap = kDefaultExpansionCap);

double eval_term(const MultiIndex &e, const double *x);

struct Term {
  MultiIndex exponents; // over SparseModel::selected_features
  double coefficient = 0;
};

struct LambdaPoint {
  double fraction = 0; // of lambda_max
  double lambda = 0;
  std::size_t selected = 0;
  std::size_t terms = 0;
  double test_error = 0;
};

struct FitReport {
  double lambda_max = 0;    // linear (Step 1) problem
  double step1_lambda = 0;  // absolute
  double step3_lambda = 0;  // absolute
  std::size_t step1_selected = 0;
  std::size_t expanded_terms = 0;
  std::vector<LambdaPoint> lambda_path;
  double train_error = 0;
  double test_error = 0;
  long iteration_count = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  bool intercept_only = false;
  std::vector<std::string> warnings;
};

struct SparseModel {
  int degree = 3;
  double lambda = 0.03; // as a fraction of lambda_max
  std::vector<std::string> selected_features;
  std::vector<Term> terms;
  double intercept = 0; // normalized units
  NormalizationParams normalization;
  FitReport report;
};

struct ModelConfig {
  int degree = 3;
  // Penalty as a fraction of each step's lambda_max, unless absolute.
  double lambda = 0.03;
  bool lambda_absolute = false;
  // Step 1 penalty; negative means "same as lambda".
  double step1_lambda = -1;
  double train_fraction = 0.1;
  std::uint64_t seed = 42;
  // Ordinary least squares on the Step 3 support to undo LASSO shrinkage.
  bool refit = true;
  int path_points = 20;
  std::size_t expansion_cap = kDefaultExpansionCap;
  LassoOptions lasso;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Uniform random partition; train gets round(fraction * n) rows, clamped to
// [2, n - 1].
Split split_rows(std::size_t n, double train_fraction, std::uint64_t seed);

// Steps 1-3 on a raw dataset: split, normalize on the training rows, linear
// LASSO filter, degree-d expansion of the survivors, LASSO on the expanded
// terms, optional least-squares refit on the chosen terms.
SparseModel select_and_fit(const profile::Dataset &data, const ModelConfig &config);

// Same, on an explicit split.
SparseModel fit_on_split(const profile::Dataset &data, const Split &split, const ModelConfig &config);

struct TrainingSizePoint {
  double train_fraction = 0;
  std::size_t train_rows = 0;
  std::size_t selected = 0;
  double test_error = 0;
};

// select_and_fit once per training fraction, everything else unchanged.
std::vector<TrainingSizePoint> training_size_sweep(const profile::Dataset &data, const ModelConfig &config,
                                                   const std::vector<double> &fractions);

using FeatureValues = std::map<std::string, double>;

double predict(const SparseModel &model, const FeatureValues &features);
double predict_row(const SparseModel &model, const std::vector<std::string> &ids,
                   const std::vector<double> &row);

// |predicted - actual| / actual.
double prediction_error(double predicted, double actual);

// Mean relative error of the model over the given rows.
double mean_error(const SparseModel &model, const profile::Dataset &data,
                  const std::vector<std::size_t> &rows);

std::string to_json(const SparseModel &model);
SparseModel model_from_json(const std::string &text);

// "f(x1, x2) = 0.1 + 0.52*x1 - 0.69*x1^2" followed by one line per variable
// naming its feature.
std::string to_string(const SparseModel &model);

} // namespace mantis::model
