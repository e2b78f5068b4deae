#pragma once

// Lawson-Hanson active-set method for min ||A x - b|| subject to x >= 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "framecond/errors.hpp"

namespace framecond {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = -1) {
  using Eigen::Index;
  const Index m = a.rows();
  const Index n = a.cols();
  if (b.size() != m) throw InputError("nnls: right-hand side length does not match rows of A");
  if (max_iterations < 0) max_iterations = static_cast<int>(3 * n);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(m, n));

  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd sub(m, static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(b);
    z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = sol(static_cast<Index>(k));
  };

  Eigen::VectorXd w = a.transpose() * (b - a * out.x);
  int iter = 0;
  for (;;) {
    Index t = -1;
    double best = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) {
      out.converged = true;
      break;
    }
    if (iter >= max_iterations) break;
    ++iter;
    passive[t] = true;

    Eigen::VectorXd z;
    solve_passive(z);
    for (;;) {
      bool feasible = true;
      for (Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        if (passive[j] && z(j) <= 0.0) alpha = std::min(alpha, out.x(j) / (out.x(j) - z(j)));
      }
      out.x += alpha * (z - out.x);
      for (Index j = 0; j < n; ++j) {
        if (passive[j] && std::abs(out.x(j)) <= tol) {
          passive[j] = false;
          out.x(j) = 0.0;
        }
      }
      solve_passive(z);
    }
    out.x = z;
    w = a.transpose() * (b - a * out.x);
  }
  out.iterations = iter;
  out.residual_norm = (a * out.x - b).norm();
  return out;
}

}  // namespace framecond
