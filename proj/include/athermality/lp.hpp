#pragma once

// Dense phase-I simplex deciding feasibility of {A x = b, x >= 0}:
// minimize the sum of artificial variables. Bland's rule, so it cannot
// cycle. Intended for the tiny systems (<= 16 variables) of the commuting
// fast path.

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace athermality::lp {

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd x;           // valid when feasible
  double infeasibility = 0.0;  // optimal phase-I objective
  int pivots = 0;
};

inline FeasibilityResult find_feasible_point(const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b_in,
                                             double tol = 1e-10, int max_pivots = 10000) {
  const int m = static_cast<int>(a_in.rows());
  const int n = static_cast<int>(a_in.cols());
  Eigen::MatrixXd a = a_in;
  Eigen::VectorXd b = b_in;
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0) {
      a.row(i) *= -1.0;
      b[i] *= -1.0;
    }
  }
  // tableau columns: n structural, m artificial, rhs
  const int cols = n + m + 1;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  t.col(cols - 1).head(m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  // objective row: reduced costs of min Σ artificials
  for (int i = 0; i < m; ++i) t.row(m) -= t.row(i);
  t.block(m, n, 1, m).setZero();

  const double eps = 1e-12;
  FeasibilityResult res;
  for (; res.pivots < max_pivots; ++res.pivots) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (t(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) > eps) {
        const double ratio = t(i, cols - 1) / t(i, enter);
        if (leave < 0 || ratio < best - eps || (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) break;  // unbounded cannot happen for phase I
    t.row(leave) /= t(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }
  res.infeasibility = -t(m, cols - 1);
  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = std::max(0.0, t(i, cols - 1));
  res.feasible = res.infeasibility <= tol && (a_in * res.x - b_in).cwiseAbs().maxCoeff() <= 1e3 * tol;
  return res;
}

}  // namespace athermality::lp
