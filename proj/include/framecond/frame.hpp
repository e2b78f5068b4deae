#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "framecond/errors.hpp"
#include "framecond/spectral.hpp"

namespace framecond {

// N x M matrix whose columns f_1..f_M are the frame vectors.
class Frame {
 public:
  explicit Frame(Eigen::MatrixXd vectors) : vectors_(std::move(vectors)) {
    const Index n = vectors_.rows();
    const Index m = vectors_.cols();
    if (n < 1) throw InputError("Frame: dimension must be at least 1");
    if (m < n) {
      throw InputError("Frame: " + std::to_string(m) + " vectors cannot span R^" + std::to_string(n));
    }
    if (!vectors_.allFinite()) throw InputError("Frame: non-finite coordinate");
    for (Index i = 0; i < m; ++i) {
      if (vectors_.col(i).squaredNorm() == 0.0) {
        throw InputError("Frame: vector " + std::to_string(i) + " is zero");
      }
    }
    const Eigen::VectorXd lam = eigenvalues(SymMatrix(vectors_ * vectors_.transpose()));
    spans_ = lam(0) > 1e-9 * lam(n - 1);
  }

  Index dim() const noexcept { return vectors_.rows(); }
  Index count() const noexcept { return vectors_.cols(); }
  const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }
  auto vector(Index i) const { return vectors_.col(i); }

  // False when the vectors do not span R^N ("not a frame").
  bool spans() const noexcept { return spans_; }

 private:
  Eigen::MatrixXd vectors_;
  bool spans_ = false;
};

// Squared weights u_i = s_i^2 applied to f_i f_i^T.
class ScalingVector {
 public:
  explicit ScalingVector(Eigen::VectorXd squared) : u_(std::move(squared)) {
    if (u_.size() < 1) throw InputError("ScalingVector: empty");
    bool positive = false;
    for (Index i = 0; i < u_.size(); ++i) {
      if (!std::isfinite(u_(i)) || u_(i) < 0.0) {
        throw InputError("ScalingVector: weight " + std::to_string(i) + " is negative or non-finite");
      }
      positive = positive || u_(i) > 0.0;
    }
    if (!positive) throw InputError("ScalingVector: all weights are zero");
  }

  static ScalingVector ones(Index m) { return ScalingVector(Eigen::VectorXd::Ones(m)); }

  Index size() const noexcept { return u_.size(); }
  double operator[](Index i) const { return u_(i); }
  const Eigen::VectorXd& squared() const noexcept { return u_; }
  Eigen::VectorXd scales() const { return u_.cwiseSqrt(); }

 private:
  Eigen::VectorXd u_;
};

struct SpectralSummary {
  Eigen::VectorXd eigenvalues;  // ascending
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition_number = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double frobenius_dist = 0.0;
  double opnorm_dist = 0.0;
  double trace = 0.0;
};

inline SymMatrix frame_operator(const Frame& f) {
  return SymMatrix(f.vectors() * f.vectors().transpose());
}

inline SymMatrix scaled_frame_operator(const Frame& f, const ScalingVector& u) {
  if (u.size() != f.count()) {
    throw InputError("scaled_frame_operator: " + std::to_string(u.size()) + " weights for " +
                     std::to_string(f.count()) + " vectors");
  }
  return SymMatrix(f.vectors() * u.squared().asDiagonal() * f.vectors().transpose());
}

inline SpectralSummary summarize(const SymMatrix& s) {
  SpectralSummary out;
  out.eigenvalues = eigenvalues(s);
  const Index n = s.order();
  out.lambda_min = out.eigenvalues(0);
  out.lambda_max = out.eigenvalues(n - 1);
  out.condition_number = detail::condition_from_spectrum(out.eigenvalues, psd_tolerance(out.eigenvalues));
  out.gap = out.lambda_max - out.lambda_min;
  out.trace = s.trace();
  out.relative_gap = out.trace > 0.0 ? out.gap / (out.trace / static_cast<double>(n)) : kInfinity;
  out.frobenius_dist = (Eigen::MatrixXd::Identity(n, n) - s.matrix()).norm();
  out.opnorm_dist = std::max(std::abs(1.0 - out.lambda_min), std::abs(1.0 - out.lambda_max));
  return out;
}

struct EpsilonTightDiagnostics {
  double epsilon = 0.0;
  double kappa_formula = 1.0;     // 1 + 2 eps / (1 - eps)
  double gap_formula = 0.0;       // 2 eps
  double frob_bound = 0.0;        // eps sqrt(N)
  double measured_kappa = 1.0;
  double measured_gap = 0.0;
  double measured_frobenius = 0.0;
  bool symmetric = false;         // lambda_max - 1 == 1 - lambda_min
};

inline EpsilonTightDiagnostics epsilon_tight_diagnostics(const Frame& f, double norm_tol = 1e-9) {
  for (Index i = 0; i < f.count(); ++i) {
    if (std::abs(f.vector(i).norm() - 1.0) > norm_tol) {
      throw InputError("epsilon_tight_diagnostics: vector " + std::to_string(i) + " is not unit norm");
    }
  }
  const SpectralSummary s = summarize(frame_operator(f));
  const double n = static_cast<double>(f.dim());
  EpsilonTightDiagnostics d;
  d.epsilon = std::max(1.0 - s.lambda_min, s.lambda_max - 1.0);
  d.kappa_formula = d.epsilon < 1.0 ? 1.0 + 2.0 * d.epsilon / (1.0 - d.epsilon) : kInfinity;
  d.gap_formula = 2.0 * d.epsilon;
  d.frob_bound = d.epsilon * std::sqrt(n);
  d.measured_kappa = s.condition_number;
  d.measured_gap = s.gap;
  d.measured_frobenius = s.frobenius_dist;
  d.symmetric = std::abs((s.lambda_max - 1.0) - (1.0 - s.lambda_min)) <= 1e-9;
  if (d.symmetric && (std::abs(d.measured_gap - d.gap_formula) > 1e-9 ||
                      std::abs(d.measured_kappa - d.kappa_formula) > 1e-9 * std::max(1.0, d.kappa_formula))) {
    throw SolverError("epsilon_tight_diagnostics: measured spectrum disagrees with closed forms");
  }
  return d;
}

// First k with f_k orthogonal to the top eigenvector and not orthogonal to
// the bottom one, both relative to ||f_k||.
inline std::optional<Index> find_perturbation_candidate(const Frame& f, double tol = 1e-8) {
  const SymMatrix s = frame_operator(f);
  const EigenDecomposition eig = sym_eig(s);
  const Index n = f.dim();
  double gap = kInfinity;
  for (Index k = 1; k < n; ++k) gap = std::min(gap, eig.eigenvalues(k) - eig.eigenvalues(k - 1));
  if (!(gap > tol * std::max(1.0, eig.eigenvalues(n - 1)))) {
    throw PreconditionError("find_perturbation_candidate: frame operator spectrum is not simple");
  }
  const auto vmax = eig.eigenvectors.col(n - 1);
  const auto vmin = eig.eigenvectors.col(0);
  for (Index k = 0; k < f.count(); ++k) {
    const double len = f.vector(k).norm();
    if (std::abs(f.vector(k).dot(vmax)) <= tol * len && std::abs(f.vector(k).dot(vmin)) > tol * len) {
      return k;
    }
  }
  return std::nullopt;
}

// Rescales f_k by sqrt(1 + gamma) and renormalizes so that sum s_i = M.
inline ScalingVector perturbation_rescale(const Frame& f, Index k, double gamma, double tol = 1e-8) {
  const Index m = f.count();
  if (k < 0 || k >= m) throw InputError("perturbation_rescale: index out of range");
  const SymMatrix s = frame_operator(f);
  const EigenDecomposition eig = sym_eig(s);
  const Index n = f.dim();
  double delta = kInfinity;
  for (Index i = 1; i < n; ++i) delta = std::min(delta, eig.eigenvalues(i) - eig.eigenvalues(i - 1));
  if (!(delta > tol * std::max(1.0, eig.eigenvalues(n - 1)))) {
    throw PreconditionError("perturbation_rescale: frame operator spectrum is not simple");
  }
  const double len = f.vector(k).norm();
  if (std::abs(f.vector(k).dot(eig.eigenvectors.col(n - 1))) > tol * len) {
    throw PreconditionError("perturbation_rescale: f_k is not orthogonal to the top eigenvector");
  }
  if (std::abs(f.vector(k).dot(eig.eigenvectors.col(0))) <= tol * len) {
    throw PreconditionError("perturbation_rescale: f_k is orthogonal to the bottom eigenvector");
  }
  const double upper = delta / (len * len);
  if (!(gamma > 0.0 && gamma < upper)) {
    throw InputError("perturbation_rescale: gamma must lie in (0, " + std::to_string(upper) + ")");
  }
  const double md = static_cast<double>(m);
  const double root = std::sqrt(1.0 + gamma);
  const double denom = md - 1.0 + root;
  Eigen::VectorXd scales = Eigen::VectorXd::Constant(m, md / denom);
  scales(k) = md * root / denom;
  return ScalingVector(scales.cwiseAbs2());
}

}  // namespace framecond
