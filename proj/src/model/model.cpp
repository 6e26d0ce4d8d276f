#include "mantis/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mantis/error.hpp"

namespace mantis::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

const ColumnScale *NormalizationParams::find(const std::string &id) const {
  for (const auto &c : columns)
    if (c.id == id) return &c;
  return nullptr;
}

double NormalizationParams::scale_y(double y) const {
  return y_max > y_min ? (y - y_min) / (y_max - y_min) : 0.0;
}

double NormalizationParams::unscale_y(double v) const { return y_min + v * (y_max - y_min); }

namespace {

class NoUsableFeatures : public UserError {
public:
  NoUsableFeatures() : UserError("no usable features") {}
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

MatrixXd centered(const MatrixXd &x) { return x.rowwise() - x.colwise().mean(); }

VectorXd centered(const VectorXd &y) {
  return y.array() - (y.size() ? y.mean() : 0.0);
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void require_finite(const MatrixXd &x, const VectorXd &y) {
  if (!x.allFinite() || !y.allFinite()) throw UserError("non-finite values in regression data");
}

} // namespace

std::pair<Normalized, NormalizationParams>
normalize_and_prune(const profile::Dataset &data, const std::vector<std::size_t> &fit_rows_in) {
  const std::vector<std::size_t> fit_rows = fit_rows_in.empty() ? all_rows(data.n()) : fit_rows_in;
  if (fit_rows.size() < 2) throw UserError("normalization needs at least two rows");
  NormalizationParams params;

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < data.m(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : fit_rows) {
      lo = std::min(lo, data.x[r][j]);
      hi = std::max(hi, data.x[r][j]);
    }
    if (!(hi > lo)) {
      params.dropped_constant.push_back(data.feature_ids[j]);
      continue;
    }
    kept.push_back(j);
    params.columns.push_back({data.feature_ids[j], lo, hi});
  }

  // Duplicate detection on the scaled training rows.
  std::vector<bool> duplicate(kept.size(), false);
  auto scaled = [&](std::size_t c, std::size_t r) {
    const ColumnScale &s = params.columns[c];
    return (data.x[r][kept[c]] - s.min) / (s.max - s.min);
  };
  for (std::size_t b = 0; b < kept.size(); ++b) {
    for (std::size_t a = 0; a < b; ++a) {
      if (duplicate[a]) continue;
      bool same = true;
      for (std::size_t r : fit_rows)
        if (std::fabs(scaled(a, r) - scaled(b, r)) > 1e-12) {
          same = false;
          break;
        }
      if (same) {
        duplicate[b] = true;
        params.dropped_duplicate.emplace_back(params.columns[b].id, params.columns[a].id);
        break;
      }
    }
  }
  std::vector<ColumnScale> survivors;
  for (std::size_t c = 0; c < kept.size(); ++c)
    if (!duplicate[c]) survivors.push_back(params.columns[c]);
  params.columns = std::move(survivors);
  if (params.columns.empty()) throw NoUsableFeatures();

  double ylo = std::numeric_limits<double>::infinity();
  double yhi = -ylo;
  for (std::size_t r : fit_rows) {
    ylo = std::min(ylo, data.y[r]);
    yhi = std::max(yhi, data.y[r]);
  }
  params.y_min = ylo;
  params.y_max = yhi;

  return {apply_normalization(data, params), params};
}

Normalized apply_normalization(const profile::Dataset &data, const NormalizationParams &params) {
  Normalized out;
  const std::size_t n = data.n();
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(params.columns.size()));
  out.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < params.columns.size(); ++c) {
    const ColumnScale &s = params.columns[c];
    const int j = data.column(s.id);
    if (j < 0) throw UserError("dataset lacks feature " + s.id);
    out.ids.push_back(s.id);
    for (std::size_t r = 0; r < n; ++r)
      out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          (data.x[r][static_cast<std::size_t>(j)] - s.min) / (s.max - s.min);
  }
  for (std::size_t r = 0; r < n; ++r)
    out.y(static_cast<Eigen::Index>(r)) = params.scale_y(data.y[r]);
  return out;
}

double lambda_max(const MatrixXd &x, const VectorXd &y) {
  const Eigen::Index n = x.rows();
  if (n == 0) throw UserError("lambda_max of an empty problem");
  require_finite(x, y);
  const MatrixXd xc = centered(x);
  const VectorXd yc = centered(y);
  double best = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    best = std::max(best, std::fabs(xc.col(j).dot(yc) / static_cast<double>(n)));
  return best;
}

double lasso_objective(const MatrixXd &x, const VectorXd &y, double lambda, double intercept,
                       const VectorXd &beta) {
  const VectorXd r = (y - x * beta).array() - intercept;
  return r.squaredNorm() / (2.0 * static_cast<double>(x.rows())) + lambda * beta.lpNorm<1>();
}

LassoResult lasso_fit(const MatrixXd &x, const VectorXd &y, double lambda, const LassoOptions &opt) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (n == 0) throw UserError("LASSO on an empty problem");
  if (y.size() != n) throw UserError("LASSO dimension mismatch");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw UserError("LASSO penalty must be finite and >= 0");
  require_finite(x, y);

  const double dn = static_cast<double>(n);
  const MatrixXd xc = centered(x);
  const VectorXd xmean = x.colwise().mean();
  const double ymean = y.mean();
  VectorXd r = centered(y);
  VectorXd a(m);
  for (Eigen::Index j = 0; j < m; ++j)
    a(j) = xc.col(j).squaredNorm() / dn;

  LassoResult res;
  res.beta = VectorXd::Zero(m);
  VectorXd &beta = res.beta;

  auto update = [&](Eigen::Index j) {
    if (a(j) <= 0) return 0.0;
    const double old = beta(j);
    const double rho = xc.col(j).dot(r) / dn + a(j) * old;
    const double nb = soft_threshold(rho, lambda) / a(j);
    if (nb == old) return 0.0;
    r.noalias() -= (nb - old) * xc.col(j);
    beta(j) = nb;
    return std::fabs(nb - old);
  };
  auto record = [&] {
    if (opt.record_objective)
      res.objective.push_back(lasso_objective(x, y, lambda, ymean - xmean.dot(beta), beta));
  };

  std::vector<Eigen::Index> active;
  while (res.sweeps < opt.max_sweeps) {
    double change = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      change = std::max(change, update(j));
    ++res.sweeps;
    record();
    if (change <= opt.tolerance) {
      res.converged = true;
      break;
    }
    // Iterate on the current support before the next full sweep.
    active.clear();
    for (Eigen::Index j = 0; j < m; ++j)
      if (beta(j) != 0) active.push_back(j);
    while (res.sweeps < opt.max_sweeps) {
      double c = 0;
      for (Eigen::Index j : active)
        c = std::max(c, update(j));
      ++res.sweeps;
      record();
      if (c <= opt.tolerance) break;
    }
  }
  res.intercept = ymean - xmean.dot(beta);
  return res;
}

std::size_t expansion_size(std::size_t k, int d) {
  unsigned __int128 acc = 1;
  for (int i = 1; i <= d; ++i) {
    acc = acc * (k + static_cast<std::size_t>(i)) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(acc);
}

std::vector<MultiIndex> poly_expand(std::size_t k, int d, std::size_t cap) {
  if (k == 0) throw UserError("polynomial expansion needs at least one feature");
  if (d < 1) throw UserError("polynomial degree must be at least 1");
  const std::size_t count = expansion_size(k, d);
  if (count > cap)
    throw UserError("degree-" + std::to_string(d) + " expansion of " + std::to_string(k) +
                    " features has " + std::to_string(count) + " terms, above the cap of " +
                    std::to_string(cap) + "; use fewer features or a lower degree");
  std::vector<MultiIndex> out;
  out.reserve(count);
  MultiIndex cur(k, 0);
  auto rec = [&](auto &&self, std::size_t pos, int left) -> void {
    if (pos + 1 == k) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[pos] = e;
      self(self, pos + 1, left - e);
    }
  };
  for (int t = 0; t <= d; ++t)
    rec(rec, 0, t);
  return out;
}

double eval_term(const MultiIndex &e, const double *x) {
  double v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (int p = 0; p < e[i]; ++p)
      v *= x[i];
  return v;
}

Split split_rows(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw UserError("train fraction must lie in (0, 1)");
  if (n < 3) throw UserError("need at least 3 samples to split into train and test");
  std::vector<std::size_t> idx = all_rows(n);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(idx[i], idx[j]);
  }
  const auto want = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const std::size_t ntrain = std::clamp<std::size_t>(want, 2, n - 1);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ntrain));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(ntrain), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double prediction_error(double predicted, double actual) {
  if (!(actual > 0)) throw UserError("prediction error needs a positive actual value");
  return std::fabs(predicted - actual) / actual;
}

namespace {

// Maps dataset columns onto a model's selected features.
class RowEvaluator {
public:
  RowEvaluator(const SparseModel &m, const std::vector<std::string> &ids) : m_(m) {
    for (const auto &f : m.selected_features) {
      auto it = std::find(ids.begin(), ids.end(), f);
      if (it == ids.end()) throw UserError("missing feature " + f);
      cols_.push_back(static_cast<std::size_t>(it - ids.begin()));
      const ColumnScale *s = m.normalization.find(f);
      if (!s) throw UserError("model has no normalization for feature " + f);
      scales_.push_back(*s);
    }
    buf_.resize(cols_.size());
  }

  double operator()(const std::vector<double> &row) {
    for (std::size_t i = 0; i < cols_.size(); ++i)
      buf_[i] = (row[cols_[i]] - scales_[i].min) / (scales_[i].max - scales_[i].min);
    double v = m_.intercept;
    for (const auto &t : m_.terms)
      v += t.coefficient * eval_term(t.exponents, buf_.data());
    return m_.normalization.unscale_y(v);
  }

private:
  const SparseModel &m_;
  std::vector<std::size_t> cols_;
  std::vector<ColumnScale> scales_;
  std::vector<double> buf_;
};

MatrixXd take_rows(const MatrixXd &x, const std::vector<std::size_t> &rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

VectorXd take_rows(const VectorXd &y, const std::vector<std::size_t> &rows) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
  return out;
}

void finish_report(SparseModel &m, const profile::Dataset &data, const Split &split) {
  m.report.train_rows = split.train.size();
  m.report.test_rows = split.test.size();
  m.report.train_error = mean_error(m, data, split.train);
  m.report.test_error = split.test.empty() ? 0.0 : mean_error(m, data, split.test);
}

SparseModel fit_once(const profile::Dataset &data, const Split &split, const ModelConfig &cfg) {
  if (cfg.degree < 1) throw UserError("polynomial degree must be at least 1");
  SparseModel m;
  m.degree = cfg.degree;
  m.lambda = cfg.lambda;

  Normalized norm;
  try {
    std::tie(norm, m.normalization) = normalize_and_prune(data, split.train);
  } catch (const NoUsableFeatures &) {
    // Intercept-only model on the raw training mean.
    double mean = 0;
    for (std::size_t r : split.train)
      mean += data.y[r];
    mean /= static_cast<double>(split.train.size());
    m.normalization = NormalizationParams{};
    m.normalization.y_min = mean;
    m.normalization.y_max = mean;
    m.report.intercept_only = true;
    m.report.warnings.push_back("no usable features; intercept-only model");
    finish_report(m, data, split);
    return m;
  }

  const MatrixXd x = take_rows(norm.x, split.train);
  const VectorXd y = take_rows(norm.y, split.train);

  // Step 1: linear LASSO filter.
  m.report.lambda_max = lambda_max(x, y);
  const double frac1 = cfg.step1_lambda >= 0 ? cfg.step1_lambda : cfg.lambda;
  m.report.step1_lambda = cfg.lambda_absolute ? frac1 : frac1 * m.report.lambda_max;
  LassoResult s1 = lasso_fit(x, y, m.report.step1_lambda, cfg.lasso);
  m.report.iteration_count += s1.sweeps;
  std::vector<std::size_t> survivors;
  for (Eigen::Index j = 0; j < s1.beta.size(); ++j)
    if (s1.beta(j) != 0) survivors.push_back(static_cast<std::size_t>(j));
  m.report.step1_selected = survivors.size();
  if (survivors.empty()) {
    m.intercept = y.mean();
    m.report.intercept_only = true;
    m.report.warnings.push_back("step 1 selected no features; intercept-only model");
    finish_report(m, data, split);
    return m;
  }

  // Step 2: degree-d expansion of the survivors (constant term excluded,
  // the intercept covers it).
  std::vector<MultiIndex> expansion = poly_expand(survivors.size(), cfg.degree, cfg.expansion_cap);
  expansion.erase(expansion.begin());
  m.report.expanded_terms = expansion.size();
  MatrixXd z(x.rows(), static_cast<Eigen::Index>(expansion.size()));
  std::vector<double> buf(survivors.size());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (std::size_t i = 0; i < survivors.size(); ++i)
      buf[i] = x(r, static_cast<Eigen::Index>(survivors[i]));
    for (std::size_t t = 0; t < expansion.size(); ++t)
      z(r, static_cast<Eigen::Index>(t)) = eval_term(expansion[t], buf.data());
  }

  // Step 3: LASSO over the expanded terms.
  const double lmax3 = lambda_max(z, y);
  m.report.step3_lambda = cfg.lambda_absolute ? cfg.lambda : cfg.lambda * lmax3;
  LassoResult s3 = lasso_fit(z, y, m.report.step3_lambda, cfg.lasso);
  m.report.iteration_count += s3.sweeps;
  std::vector<std::size_t> support;
  for (Eigen::Index t = 0; t < s3.beta.size(); ++t)
    if (s3.beta(t) != 0) support.push_back(static_cast<std::size_t>(t));

  std::vector<double> coef(support.size());
  double intercept = s3.intercept;
  for (std::size_t i = 0; i < support.size(); ++i)
    coef[i] = s3.beta(static_cast<Eigen::Index>(support[i]));
  if (cfg.refit && !support.empty()) {
    if (support.size() + 1 <= static_cast<std::size_t>(x.rows())) {
      MatrixXd a(x.rows(), static_cast<Eigen::Index>(support.size() + 1));
      a.col(0).setOnes();
      for (std::size_t i = 0; i < support.size(); ++i)
        a.col(static_cast<Eigen::Index>(i + 1)) = z.col(static_cast<Eigen::Index>(support[i]));
      const VectorXd sol = a.colPivHouseholderQr().solve(y);
      if (sol.allFinite()) {
        intercept = sol(0);
        for (std::size_t i = 0; i < support.size(); ++i)
          coef[i] = sol(static_cast<Eigen::Index>(i + 1));
      }
    } else {
      m.report.warnings.push_back("more terms than training rows; least-squares refit skipped");
    }
  }

  // Keep nonzero terms; selected features are those the terms use.
  std::vector<bool> used(survivors.size(), false);
  for (std::size_t i = 0; i < support.size(); ++i)
    if (coef[i] != 0)
      for (std::size_t v = 0; v < survivors.size(); ++v)
        if (expansion[support[i]][v] > 0) used[v] = true;
  std::vector<int> remap(survivors.size(), -1);
  for (std::size_t v = 0; v < survivors.size(); ++v)
    if (used[v]) {
      remap[v] = static_cast<int>(m.selected_features.size());
      m.selected_features.push_back(norm.ids[survivors[v]]);
    }
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (coef[i] == 0) continue;
    Term t;
    t.coefficient = coef[i];
    t.exponents.assign(m.selected_features.size(), 0);
    for (std::size_t v = 0; v < survivors.size(); ++v)
      if (remap[v] >= 0) t.exponents[static_cast<std::size_t>(remap[v])] = expansion[support[i]][v];
    m.terms.push_back(std::move(t));
  }
  m.intercept = intercept;
  if (m.terms.empty()) {
    m.report.intercept_only = true;
    m.report.warnings.push_back("step 3 kept no terms; intercept-only model");
  }
  finish_report(m, data, split);
  return m;
}

} // namespace

SparseModel fit_on_split(const profile::Dataset &data, const Split &split, const ModelConfig &config) {
  SparseModel m = fit_once(data, split, config);
  if (config.path_points > 0 && !split.test.empty()) {
    const int p = std::max(config.path_points, 2);
    for (int i = 0; i < p; ++i) {
      const double frac = std::pow(10.0, -3.0 + 3.0 * i / (p - 1));
      ModelConfig c = config;
      c.lambda = frac;
      c.lambda_absolute = false;
      c.step1_lambda = -1;
      c.path_points = 0;
      SparseModel pm = fit_once(data, split, c);
      m.report.lambda_path.push_back({frac, frac * pm.report.lambda_max, pm.selected_features.size(),
                                      pm.terms.size(), pm.report.test_error});
    }
  }
  return m;
}

SparseModel select_and_fit(const profile::Dataset &data, const ModelConfig &config) {
  return fit_on_split(data, split_rows(data.n(), config.train_fraction, config.seed), config);
}

std::vector<TrainingSizePoint> training_size_sweep(const profile::Dataset &data, const ModelConfig &config,
                                                   const std::vector<double> &fractions) {
  std::vector<TrainingSizePoint> out;
  for (double f : fractions) {
    ModelConfig c = config;
    c.train_fraction = f;
    c.path_points = 0;
    const SparseModel m = select_and_fit(data, c);
    out.push_back({f, m.report.train_rows, m.selected_features.size(), m.report.test_error});
  }
  return out;
}

double predict(const SparseModel &model, const FeatureValues &features) {
  std::vector<double> row;
  row.reserve(model.selected_features.size());
  for (const auto &f : model.selected_features) {
    auto it = features.find(f);
    if (it == features.end()) throw UserError("missing feature " + f);
    row.push_back(it->second);
  }
  return RowEvaluator(model, model.selected_features)(row);
}

double predict_row(const SparseModel &model, const std::vector<std::string> &ids,
                   const std::vector<double> &row) {
  return RowEvaluator(model, ids)(row);
}

double mean_error(const SparseModel &model, const profile::Dataset &data,
                  const std::vector<std::size_t> &rows) {
  if (rows.empty()) return 0.0;
  RowEvaluator eval(model, data.feature_ids);
  double sum = 0;
  for (std::size_t r : rows)
    sum += prediction_error(eval(data.x[r]), data.y[r]);
  return sum / static_cast<double>(rows.size());
}

std::string to_json(const SparseModel &m) {
  json j;
  j["degree"] = m.degree;
  j["lambda"] = m.lambda;
  j["selectedFeatures"] = m.selected_features;
  j["terms"] = json::array();
  for (const auto &t : m.terms)
    j["terms"].push_back({{"exponents", t.exponents}, {"coefficient", t.coefficient}});
  j["intercept"] = m.intercept;
  json norm;
  norm["columns"] = json::array();
  for (const auto &c : m.normalization.columns)
    norm["columns"].push_back({{"id", c.id}, {"min", c.min}, {"max", c.max}});
  norm["droppedConstant"] = m.normalization.dropped_constant;
  norm["droppedDuplicate"] = json::array();
  for (const auto &[dropped, kept] : m.normalization.dropped_duplicate)
    norm["droppedDuplicate"].push_back({{"dropped", dropped}, {"kept", kept}});
  norm["yMin"] = m.normalization.y_min;
  norm["yMax"] = m.normalization.y_max;
  j["normalization"] = norm;
  const FitReport &r = m.report;
  json rep;
  rep["lambdaMax"] = r.lambda_max;
  rep["step1Lambda"] = r.step1_lambda;
  rep["step3Lambda"] = r.step3_lambda;
  rep["step1Selected"] = r.step1_selected;
  rep["expandedTerms"] = r.expanded_terms;
  rep["trainError"] = r.train_error;
  rep["testError"] = r.test_error;
  rep["iterationCount"] = r.iteration_count;
  rep["trainRows"] = r.train_rows;
  rep["testRows"] = r.test_rows;
  rep["interceptOnly"] = r.intercept_only;
  rep["warnings"] = r.warnings;
  rep["lambdaPath"] = json::array();
  for (const auto &p : r.lambda_path)
    rep["lambdaPath"].push_back({{"fraction", p.fraction},
                                 {"lambda", p.lambda},
                                 {"selected", p.selected},
                                 {"terms", p.terms},
                                 {"testError", p.test_error}});
  j["report"] = rep;
  return j.dump(2) + "\n";
}

SparseModel model_from_json(const std::string &text) {
  SparseModel m;
  try {
    const json j = json::parse(text);
    m.degree = j.at("degree").get<int>();
    m.lambda = j.at("lambda").get<double>();
    m.selected_features = j.at("selectedFeatures").get<std::vector<std::string>>();
    for (const auto &t : j.at("terms")) {
      Term term{t.at("exponents").get<MultiIndex>(), t.at("coefficient").get<double>()};
      if (term.exponents.size() != m.selected_features.size())
        throw UserError("model term has the wrong number of exponents");
      m.terms.push_back(std::move(term));
    }
    m.intercept = j.at("intercept").get<double>();
    const json &norm = j.at("normalization");
    for (const auto &c : norm.at("columns"))
      m.normalization.columns.push_back(
          {c.at("id").get<std::string>(), c.at("min").get<double>(), c.at("max").get<double>()});
    m.normalization.dropped_constant = norm.at("droppedConstant").get<std::vector<std::string>>();
    for (const auto &d : norm.at("droppedDuplicate"))
      m.normalization.dropped_duplicate.emplace_back(d.at("dropped").get<std::string>(),
                                                     d.at("kept").get<std::string>());
    m.normalization.y_min = norm.at("yMin").get<double>();
    m.normalization.y_max = norm.at("yMax").get<double>();
    if (j.contains("report")) {
      const json &rep = j.at("report");
      FitReport &r = m.report;
      r.lambda_max = rep.at("lambdaMax").get<double>();
      r.step1_lambda = rep.at("step1Lambda").get<double>();
      r.step3_lambda = rep.at("step3Lambda").get<double>();
      r.step1_selected = rep.at("step1Selected").get<std::size_t>();
      r.expanded_terms = rep.at("expandedTerms").get<std::size_t>();
      r.train_error = rep.at("trainError").get<double>();
      r.test_error = rep.at("testError").get<double>();
      r.iteration_count = rep.at("iterationCount").get<long>();
      r.train_rows = rep.at("trainRows").get<std::size_t>();
      r.test_rows = rep.at("testRows").get<std::size_t>();
      r.intercept_only = rep.at("interceptOnly").get<bool>();
      r.warnings = rep.at("warnings").get<std::vector<std::string>>();
      for (const auto &p : rep.at("lambdaPath"))
        r.lambda_path.push_back({p.at("fraction").get<double>(), p.at("lambda").get<double>(),
                                 p.at("selected").get<std::size_t>(), p.at("terms").get<std::size_t>(),
                                 p.at("testError").get<double>()});
    }
  } catch (const json::exception &e) {
    throw UserError(std::string("malformed model file: ") + e.what());
  }
  return m;
}

std::string to_string(const SparseModel &m) {
  std::ostringstream os;
  os << std::setprecision(4);
  auto var = [](std::size_t i) { return "x" + std::to_string(i + 1); };
  os << "f(";
  for (std::size_t i = 0; i < m.selected_features.size(); ++i)
    os << (i ? ", " : "") << var(i);
  os << ") = " << m.normalization.unscale_y(m.intercept);
  const double scale = m.normalization.y_max - m.normalization.y_min;
  for (const auto &t : m.terms) {
    const double c = t.coefficient * scale;
    os << (c < 0 ? " - " : " + ") << std::fabs(c);
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      if (t.exponents[i] == 0) continue;
      os << "·" << var(i);
      if (t.exponents[i] > 1) os << "^" << t.exponents[i];
    }
  }
  os << "\n";
  for (std::size_t i = 0; i < m.selected_features.size(); ++i)
    os << "  " << var(i) << " = " << m.selected_features[i] << " (normalized)\n";
  return os.str();
}

} // namespace mantis::model
