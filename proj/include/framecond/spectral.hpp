#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "framecond/errors.hpp"

namespace framecond {

using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Dense real symmetric matrix. The input is symmetrized on construction,
// so (i,j) and (j,i) hold bit-identical values.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
      throw InputError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected square");
    }
    if (m.rows() < 1) throw InputError("SymMatrix: order must be at least 1");
    data_ = 0.5 * (m + m.transpose());
  }

  static SymMatrix identity(Index n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }
  static SymMatrix zero(Index n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }

  Index order() const noexcept { return data_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }
  double trace() const { return data_.trace(); }
  bool all_finite() const { return data_.allFinite(); }

  SymMatrix scaled(double c) const { return SymMatrix(c * data_); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(a.data_ + b.data_);
  }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(a.data_ - b.data_);
  }
  friend SymMatrix operator*(double c, const SymMatrix& a) { return a.scaled(c); }

 private:
  Eigen::MatrixXd data_;
};

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalues(k)
};

enum class MatrixNorm { operator_norm, frobenius };

inline EigenDecomposition sym_eig(const SymMatrix& a) {
  if (!a.all_finite()) throw InputError("sym_eig: matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw SolverError("sym_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Eigen::VectorXd eigenvalues(const SymMatrix& a) {
  if (!a.all_finite()) throw InputError("eigenvalues: matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SolverError("eigenvalues: eigensolver did not converge");
  return solver.eigenvalues();
}

// Spectral norm of a symmetric matrix from its ascending eigenvalues.
inline double spectral_norm(const Eigen::VectorXd& ascending) {
  return std::max(std::abs(ascending(0)), std::abs(ascending(ascending.size() - 1)));
}

// Default PSD tolerance 1e-9 * max(1, ||A||_2).
inline double psd_tolerance(const Eigen::VectorXd& ascending) {
  return 1e-9 * std::max(1.0, spectral_norm(ascending));
}

inline double psd_tolerance(const SymMatrix& a) { return psd_tolerance(eigenvalues(a)); }

namespace detail {

inline double condition_from_spectrum(const Eigen::VectorXd& lam, double tol) {
  const double lo = lam(0);
  const double hi = lam(lam.size() - 1);
  if (lo < -tol) {
    throw NotPsdError("matrix is not positive semidefinite (lambda_min = " + std::to_string(lo) + ")");
  }
  if (spectral_norm(lam) <= tol) return 0.0;
  if (lo <= tol) return kInfinity;
  return hi / lo;
}

}  // namespace detail

// lambda_max / lambda_min, +inf for singular PSD input, 0 for the zero matrix.
inline double extended_condition_number(const SymMatrix& a, std::optional<double> tol = std::nullopt) {
  const Eigen::VectorXd lam = eigenvalues(a);
  return detail::condition_from_spectrum(lam, tol.value_or(psd_tolerance(lam)));
}

inline double distance_to_identity(const SymMatrix& a, MatrixNorm norm) {
  if (!a.all_finite()) throw InputError("distance_to_identity: matrix has non-finite entries");
  const Index n = a.order();
  if (norm == MatrixNorm::frobenius) {
    return (Eigen::MatrixXd::Identity(n, n) - a.matrix()).norm();
  }
  const Eigen::VectorXd lam = eigenvalues(a);
  return std::max(std::abs(1.0 - lam(0)), std::abs(1.0 - lam(n - 1)));
}

// Smallest distance between two eigenvalues; +inf for order 1.
inline double min_eigengap(const SymMatrix& a) {
  const Eigen::VectorXd lam = eigenvalues(a);
  double gap = kInfinity;
  for (Index k = 1; k < lam.size(); ++k) gap = std::min(gap, lam(k) - lam(k - 1));
  return gap;
}

}  // namespace framecond
