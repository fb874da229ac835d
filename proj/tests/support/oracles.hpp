#ifndef DIDFORGE_TEST_ORACLES_HPP
#define DIDFORGE_TEST_ORACLES_HPP

// Independent oracles used only by tests.  These deliberately avoid the
// library's solver paths: least squares is solved from the normal equations
// by Gauss-Jordan elimination, and the TWFE reference builds the full dummy
// design instead of demeaning.  Keep them slow and obvious.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "didforge/panel.hpp"

namespace oracles {

// Solve A x = b by Gauss-Jordan with partial pivoting.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-14)
      throw std::runtime_error("oracle: singular system");
    a.row(col).swap(a.row(piv));
    std::swap(b(col), b(piv));
    const double d = a(col, col);
    a.row(col) /= d;
    b(col) /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      a.row(r) -= f * a.row(col);
      b(r) -= f * b(col);
    }
  }
  return b;
}

// OLS coefficients from the normal equations X'X b = X'y.
inline Eigen::VectorXd ols_normal_equations(const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& y) {
  return gauss_solve(x.transpose() * x, x.transpose() * y);
}

// TWFE regression Y_it on D_it, X_it plus unit and time dummies, estimated
// from the stacked dummy-variable design.  Returns the coefficient on D.
inline double twfe_dummy_alpha(const didforge::PanelDataset& data) {
  const int n = data.n_units, T = data.n_periods, k = data.k();
  const int rows = n * T;
  // columns: D, X (k), intercept, unit dummies 2..n, time dummies 2..T
  const int cols = 1 + k + 1 + (n - 1) + (T - 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd y(rows);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    for (int t = 1; t <= T; ++t, ++r) {
      y(r) = data.outcome(i, t - 1);
      x(r, 0) = data.d(i, t);
      for (int j = 0; j < k; ++j) x(r, 1 + j) = data.x_tv[j](i, t - 1);
      x(r, 1 + k) = 1.0;
      if (i >= 1) x(r, 1 + k + 1 + (i - 1)) = 1.0;
      if (t >= 2) x(r, 1 + k + 1 + (n - 1) + (t - 2)) = 1.0;
    }
  }
  return ols_normal_equations(x, y)(0);
}

// Plain IRLS logit, independent of the library's Newton/step-halving path.
inline Eigen::VectorXd logit_irls(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y, int iters = 60) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd p(eta.size()), w(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
      p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = p(i) * (1.0 - p(i));
    }
    Eigen::MatrixXd xtwx = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd score = x.transpose() * (y - p);
    beta += gauss_solve(xtwx, score);
  }
  return beta;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

// Monte Carlo standard error of the mean.
inline double mc_se(const std::vector<double>& v) {
  return sd(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace oracles

#endif
