#pragma once

// Independent optimality check for (1/2n)||y - b0 - X b||^2 + lambda ||b||_1:
// the intercept makes the residual mean zero, and for every column j the
// correlation c_j = <X_j, r> / n satisfies |c_j| <= lambda when b_j = 0 and
// c_j = lambda * sign(b_j) otherwise.

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace mantis::testgen {

inline double kkt_violation(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, double lambda,
                            double intercept, const Eigen::VectorXd &beta) {
  const double n = static_cast<double>(x.rows());
  Eigen::VectorXd r(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double fit = intercept;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      fit += x(i, j) * beta(j);
    r(i) = y(i) - fit;
  }
  double worst = std::fabs(r.sum() / n);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double c = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      c += x(i, j) * r(i);
    c /= n;
    if (beta(j) == 0)
      worst = std::max(worst, std::fabs(c) - lambda);
    else
      worst = std::max(worst, std::fabs(c - lambda * (beta(j) > 0 ? 1.0 : -1.0)));
  }
  return std::max(worst, 0.0);
}

// Random instance: n x m design in [0,1], 3 nonzero true coefficients,
// Gaussian noise of standard deviation sigma.
struct SparseInstance {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

template <typename Rng> SparseInstance sparse_instance(Rng &rng, int n, int m, int nonzeros, double sigma) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma);
  SparseInstance s;
  s.x.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      s.x(i, j) = unit(rng);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < nonzeros; ++k)
    truth(static_cast<Eigen::Index>(rng() % static_cast<unsigned>(m))) = (unit(rng) < 0.5 ? -1 : 1) * (0.5 + unit(rng));
  s.y = s.x * truth;
  for (int i = 0; i < n; ++i)
    s.y(i) += 0.3 + noise(rng);
  return s;
}

} // namespace mantis::testgen
