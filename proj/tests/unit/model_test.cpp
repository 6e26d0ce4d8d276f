#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "kkt.hpp"
#include "mantis/model/model.hpp"

using namespace mantis::model;
using mantis::profile::Dataset;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Dataset make_dataset(std::vector<std::string> ids, std::vector<std::vector<double>> x, std::vector<double> y) {
  Dataset d;
  d.feature_ids = std::move(ids);
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

// Brute-force enumeration of exponent vectors with total degree <= d.
std::set<MultiIndex> brute_force_expansion(std::size_t k, int d) {
  std::set<MultiIndex> out;
  MultiIndex cur(k, 0);
  for (;;) {
    int sum = 0;
    for (int e : cur)
      sum += e;
    if (sum <= d) out.insert(cur);
    std::size_t i = 0;
    while (i < k && cur[i] == d) cur[i++] = 0;
    if (i == k) break;
    ++cur[i];
  }
  return out;
}

std::size_t binomial(std::size_t n, std::size_t r) {
  std::size_t v = 1;
  for (std::size_t i = 1; i <= r; ++i)
    v = v * (n - r + i) / i;
  return v;
}

} // namespace

TEST(Normalize, ScalesToUnitInterval) {
  auto [norm, params] = normalize_and_prune(make_dataset({"a", "b"}, {{2, 0}, {4, 1}, {6, 5}}, {1, 2, 3}));
  EXPECT_EQ(norm.x(0, 0), 0.0);
  EXPECT_EQ(norm.x(1, 0), 0.5);
  EXPECT_EQ(norm.x(2, 0), 1.0);
  EXPECT_EQ(norm.y(1), 0.5);
  EXPECT_EQ(params.columns.size(), 2u);
}

TEST(Normalize, DropsConstantAndDuplicateColumns) {
  auto [norm, params] = normalize_and_prune(
      make_dataset({"c", "a", "a2", "b"}, {{5, 1, 10, 3}, {5, 2, 20, 1}, {5, 3, 30, 2}}, {1, 2, 3}));
  EXPECT_EQ(params.dropped_constant, std::vector<std::string>{"c"});
  ASSERT_EQ(params.dropped_duplicate.size(), 1u);
  EXPECT_EQ(params.dropped_duplicate[0].first, "a2");
  EXPECT_EQ(params.dropped_duplicate[0].second, "a");
  EXPECT_EQ(norm.ids, (std::vector<std::string>{"a", "b"}));
}

TEST(Normalize, AllConstantIsAnError) {
  EXPECT_THROW(normalize_and_prune(make_dataset({"c"}, {{5}, {5}}, {1, 2})), mantis::UserError);
}

TEST(Normalize, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::vector<std::vector<double>> x(30, std::vector<double>(3));
  std::vector<double> y(30);
  for (auto &row : x)
    for (auto &v : row)
      v = u(rng);
  for (auto &v : y)
    v = u(rng);
  Dataset d = make_dataset({"a", "b", "c"}, x, y);
  auto [norm, params] = normalize_and_prune(d);
  for (std::size_t r = 0; r < 30; ++r) {
    EXPECT_NEAR(params.unscale_y(norm.y(static_cast<Eigen::Index>(r))), y[r], 1e-12 * 1e3);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto &s = params.columns[c];
      EXPECT_NEAR(s.min + norm.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * (s.max - s.min),
                  x[r][c], 1e-12 * 1e3);
    }
  }
}

TEST(LambdaMax, SingleColumnEqualToCenteredY) {
  VectorXd y(4);
  y << -1.5, 0.5, 2.0, -1.0;
  MatrixXd x = y;
  EXPECT_NEAR(lambda_max(x, y), y.dot(y) / 4, 1e-15);
}

TEST(LambdaMax, OrthogonalIsZero) {
  MatrixXd x(4, 1);
  x << 1, -1, 1, -1;
  VectorXd y(4);
  y << 1, 1, -1, -1;
  EXPECT_EQ(lambda_max(x, y), 0.0);
}

TEST(LambdaMax, MatchesColumnScan) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  MatrixXd x(20, 5);
  VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    y(i) = u(rng);
    for (int j = 0; j < 5; ++j)
      x(i, j) = u(rng);
  }
  double ybar = 0;
  for (int i = 0; i < 20; ++i)
    ybar += y(i);
  ybar /= 20;
  double best = 0;
  for (int j = 0; j < 5; ++j) {
    double xbar = 0;
    for (int i = 0; i < 20; ++i)
      xbar += x(i, j);
    xbar /= 20;
    double s = 0;
    for (int i = 0; i < 20; ++i)
      s += (x(i, j) - xbar) * (y(i) - ybar);
    best = std::max(best, std::fabs(s) / 20);
  }
  EXPECT_NEAR(lambda_max(x, y), best, 1e-14);
  EXPECT_THROW(lambda_max(MatrixXd(0, 2), VectorXd(0)), mantis::UserError);
}

TEST(Lasso, ExactLinearDataAtZeroPenalty) {
  MatrixXd x(5, 1);
  x << 0, 0.25, 0.5, 0.75, 1;
  VectorXd y = 2 * x.col(0);
  LassoResult r = lasso_fit(x, y, 0.0);
  EXPECT_NEAR(r.beta(0), 2.0, 1e-6);
  EXPECT_NEAR(r.intercept, 0.0, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(Lasso, AtLambdaMaxEverythingIsExactlyZero) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    auto inst = mantis::testgen::sparse_instance(rng, 100, 20, 3, 0.01);
    const double lm = lambda_max(inst.x, inst.y);
    for (double scale : {1.0, 1.5, 10.0}) {
      LassoResult r = lasso_fit(inst.x, inst.y, lm * scale);
      for (Eigen::Index j = 0; j < 20; ++j)
        EXPECT_EQ(r.beta(j), 0.0);
    }
  }
}

TEST(Lasso, KktHoldsOnRandomSparseInstances) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 25; ++t) {
    auto inst = mantis::testgen::sparse_instance(rng, 100, 20, 3, 0.01);
    const double lm = lambda_max(inst.x, inst.y);
    for (double frac : {0.001, 0.03, 0.3}) {
      LassoResult r = lasso_fit(inst.x, inst.y, frac * lm);
      ASSERT_TRUE(r.converged);
      EXPECT_LE(mantis::testgen::kkt_violation(inst.x, inst.y, frac * lm, r.intercept, r.beta), 1e-6);
    }
  }
}

TEST(Lasso, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    auto inst = mantis::testgen::sparse_instance(rng, 60, 15, 3, 0.05);
    LassoOptions opt;
    opt.record_objective = true;
    LassoResult r = lasso_fit(inst.x, inst.y, 0.01 * lambda_max(inst.x, inst.y), opt);
    for (std::size_t i = 1; i < r.objective.size(); ++i)
      EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-12);
  }
}

TEST(Lasso, RejectsNonFiniteInput) {
  MatrixXd x(2, 1);
  x << 0, std::nan("");
  VectorXd y(2);
  y << 1, 2;
  EXPECT_THROW(lasso_fit(x, y, 0.1), mantis::UserError);
}

TEST(PolyExpand, TwoVariablesDegreeTwo) {
  auto e = poly_expand(2, 2);
  std::vector<MultiIndex> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(e, expected);
}

TEST(PolyExpand, SmallCounts) {
  EXPECT_EQ(poly_expand(1, 1), (std::vector<MultiIndex>{{0}, {1}}));
  EXPECT_EQ(poly_expand(5, 3).size(), 56u);
}

TEST(PolyExpand, MatchesBruteForceEnumeration) {
  for (std::size_t k = 1; k <= 6; ++k)
    for (int d = 1; d <= 4; ++d) {
      auto e = poly_expand(k, d);
      EXPECT_EQ(e.size(), binomial(k + static_cast<std::size_t>(d), static_cast<std::size_t>(d)));
      EXPECT_EQ(std::set<MultiIndex>(e.begin(), e.end()), brute_force_expansion(k, d));
      // graded: total degree never decreases along the list
      int prev = 0;
      for (const auto &m : e) {
        int deg = 0;
        for (int x : m)
          deg += x;
        EXPECT_GE(deg, prev);
        prev = deg;
      }
    }
}

TEST(PolyExpand, CapIsEnforced) {
  EXPECT_THROW(poly_expand(60, 4), mantis::UserError); // C(64,4) = 635376
  EXPECT_EQ(expansion_size(60, 4), 635376u);
}

TEST(PredictionError, Formula) {
  EXPECT_NEAR(prediction_error(1.07, 1.0), 0.07, 1e-12);
  EXPECT_EQ(prediction_error(3.5, 3.5), 0.0);
  EXPECT_EQ(prediction_error(0.5, 1.0), 0.5);
  EXPECT_THROW(prediction_error(1.0, 0.0), mantis::UserError);
}

namespace {

// y = 2 + 3 x1 x2 with ten irrelevant features; x in [1, 10].
Dataset product_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1, 10);
  std::vector<std::string> ids = {"x1", "x2"};
  for (int i = 0; i < 10; ++i)
    ids.push_back("z" + std::to_string(i));
  Dataset d;
  d.feature_ids = ids;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row;
    for (std::size_t j = 0; j < ids.size(); ++j)
      row.push_back(u(rng));
    d.y.push_back(2 + 3 * row[0] * row[1]);
    d.x.push_back(std::move(row));
  }
  return d;
}

// Least squares on the true support {1, x1 x2}.
double oracle_test_error(const Dataset &d, const Split &s) {
  MatrixXd a(static_cast<Eigen::Index>(s.train.size()), 2);
  VectorXd y(static_cast<Eigen::Index>(s.train.size()));
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1;
    a(static_cast<Eigen::Index>(i), 1) = d.x[s.train[i]][0] * d.x[s.train[i]][1];
    y(static_cast<Eigen::Index>(i)) = d.y[s.train[i]];
  }
  VectorXd c = a.colPivHouseholderQr().solve(y);
  double err = 0;
  for (std::size_t r : s.test)
    err += std::fabs(c(0) + c(1) * d.x[r][0] * d.x[r][1] - d.y[r]) / d.y[r];
  return err / static_cast<double>(s.test.size());
}

} // namespace

TEST(SelectAndFit, RecoversProductTerm) {
  Dataset d = product_dataset(200, 1);
  ModelConfig cfg;
  cfg.degree = 2;
  cfg.train_fraction = 0.3;
  cfg.path_points = 0;
  SparseModel m = select_and_fit(d, cfg);
  const Split s = split_rows(d.n(), cfg.train_fraction, cfg.seed);
  EXPECT_LE(m.report.test_error, 0.02);
  EXPECT_LE(oracle_test_error(d, s), 1e-9);
  const auto x1 = std::find(m.selected_features.begin(), m.selected_features.end(), "x1");
  const auto x2 = std::find(m.selected_features.begin(), m.selected_features.end(), "x2");
  ASSERT_NE(x1, m.selected_features.end());
  ASSERT_NE(x2, m.selected_features.end());
  bool has_product = false;
  for (const auto &t : m.terms)
    if (t.exponents[static_cast<std::size_t>(x1 - m.selected_features.begin())] == 1 &&
        t.exponents[static_cast<std::size_t>(x2 - m.selected_features.begin())] == 1)
      has_product = true;
  EXPECT_TRUE(has_product);
  for (const auto &t : m.terms) {
    EXPECT_NE(t.coefficient, 0.0);
    int deg = 0;
    for (int e : t.exponents)
      deg += e;
    EXPECT_LE(deg, 2);
  }
}

TEST(SelectAndFit, HeldOutPredictionMatchesFormula) {
  Dataset d = product_dataset(200, 2);
  ModelConfig cfg;
  cfg.degree = 2;
  cfg.train_fraction = 0.3;
  cfg.path_points = 0;
  SparseModel m = select_and_fit(d, cfg);
  const Split s = split_rows(d.n(), cfg.train_fraction, cfg.seed);
  const std::size_t r = s.test.front();
  FeatureValues fv;
  for (std::size_t j = 0; j < d.m(); ++j)
    fv[d.feature_ids[j]] = d.x[r][j];
  const double truth = 2 + 3 * d.x[r][0] * d.x[r][1];
  EXPECT_LE(prediction_error(predict(m, fv), truth), std::max(m.report.test_error * 3, 1e-9));
}

TEST(SelectAndFit, ConstantCostGivesInterceptOnlyModel) {
  Dataset d = product_dataset(50, 3);
  for (auto &y : d.y)
    y = 42;
  ModelConfig cfg;
  cfg.path_points = 0;
  cfg.train_fraction = 0.2;
  SparseModel m = select_and_fit(d, cfg);
  EXPECT_TRUE(m.terms.empty());
  EXPECT_TRUE(m.report.intercept_only);
  EXPECT_EQ(m.report.test_error, 0.0);
  EXPECT_EQ(predict(m, {}), 42.0);
}

TEST(SelectAndFit, LambdaPathHasTwentyPointsUpToLambdaMax) {
  Dataset d = product_dataset(100, 4);
  ModelConfig cfg;
  cfg.degree = 2;
  cfg.train_fraction = 0.3;
  SparseModel m = select_and_fit(d, cfg);
  ASSERT_EQ(m.report.lambda_path.size(), 20u);
  EXPECT_DOUBLE_EQ(m.report.lambda_path.back().fraction, 1.0);
  EXPECT_EQ(m.report.lambda_path.back().selected, 0u);
  for (const auto &p : m.report.lambda_path) {
    EXPECT_GT(p.lambda, 0.0);
    EXPECT_LE(p.lambda, m.report.lambda_max * (1 + 1e-12));
    EXPECT_GE(p.test_error, 0.0);
  }
}

TEST(Predict, InterceptOnlyAndTrainingMax) {
  SparseModel c;
  c.normalization.y_min = 7;
  c.normalization.y_max = 7;
  EXPECT_EQ(predict(c, {{"anything", 3.0}}), 7.0);

  SparseModel m;
  m.selected_features = {"a"};
  m.terms = {{{1}, 1.0}};
  m.normalization.columns = {{"a", 10, 30}};
  m.normalization.y_min = 100;
  m.normalization.y_max = 500;
  EXPECT_EQ(predict(m, {{"a", 30.0}}), 500.0);
  EXPECT_EQ(predict(m, {{"a", 50.0}}), 900.0); // extrapolates, no clamping
  EXPECT_THROW(predict(m, {{"b", 1.0}}), mantis::UserError);
}

TEST(ModelJson, RoundTripsBitExactly) {
  Dataset d = product_dataset(120, 5);
  ModelConfig cfg;
  cfg.degree = 3;
  cfg.train_fraction = 0.25;
  SparseModel m = select_and_fit(d, cfg);
  const std::string once = to_json(m);
  SparseModel back = model_from_json(once);
  EXPECT_EQ(to_json(back), once);
  EXPECT_EQ(back.intercept, m.intercept);
  ASSERT_EQ(back.terms.size(), m.terms.size());
  for (std::size_t i = 0; i < m.terms.size(); ++i)
    EXPECT_EQ(back.terms[i].coefficient, m.terms[i].coefficient);
  EXPECT_NE(to_string(m).find("f(x1"), std::string::npos);
}

TEST(Split, DeterministicAndDisjoint) {
  Split a = split_rows(100, 0.1, 9);
  Split b = split_rows(100, 0.1, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.train.size(), 10u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_NE(split_rows(100, 0.1, 10).train, a.train);
}
