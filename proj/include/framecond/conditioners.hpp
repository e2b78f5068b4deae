#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "framecond/cone_program.hpp"
#include "framecond/errors.hpp"
#include "framecond/frame.hpp"
#include "framecond/nnls.hpp"
#include "framecond/spectral.hpp"

namespace framecond {

struct SolverOptions {
  int max_iterations = 10000;
  double objective_tolerance = 1e-6;
  double feasibility_tolerance = 1e-8;
  std::uint64_t seed = 0;  // none of the current solvers draws random numbers

  void validate() const {
    if (max_iterations < 1) throw InputError("SolverOptions: max_iterations must be at least 1");
    if (!(objective_tolerance > 0.0)) throw InputError("SolverOptions: objective_tolerance must be positive");
    if (!(feasibility_tolerance > 0.0)) throw InputError("SolverOptions: feasibility_tolerance must be positive");
  }
};

enum class Method { sdp1, sdp2, sdp3, qp4 };
enum class SolverStatus { optimal, max_iter, infeasible };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::sdp1: return "sdp1";
    case Method::sdp2: return "sdp2";
    case Method::sdp3: return "sdp3";
    case Method::qp4: return "qp4";
  }
  return "unknown";
}

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::max_iter: return "max_iter";
    case SolverStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(const std::string& name) {
  if (name == "sdp1") return Method::sdp1;
  if (name == "sdp2") return Method::sdp2;
  if (name == "sdp3") return Method::sdp3;
  if (name == "qp4") return Method::qp4;
  return std::nullopt;
}

struct SolverReport {
  Method method;
  ScalingVector scaling;
  double objective;
  SpectralSummary before;
  SpectralSummary after;
  SolverStatus status;
  int iterations;
  double kkt_residual;
  SolverOptions options;
  std::vector<std::string> warnings;
};

enum class RescaleTarget { sdp1_form, sdp2_form };

// r u with r = 2 / (A + B) (sdp1_form) or r = 1 / A (sdp2_form), where A, B
// are the extreme eigenvalues of S_u.
inline ScalingVector rescale_to_form(const ScalingVector& u, const Frame& f, RescaleTarget target) {
  const Eigen::VectorXd lam = eigenvalues(scaled_frame_operator(f, u));
  const double lo = lam(0);
  const double hi = lam(lam.size() - 1);
  if (!(lo > psd_tolerance(lam))) throw PreconditionError("rescale_to_form: scaled frame operator is singular");
  const double r = target == RescaleTarget::sdp1_form ? 2.0 / (lo + hi) : 1.0 / lo;
  return ScalingVector(r * u.squared());
}

namespace detail {

// Column i is vec(f_i f_i^T).
inline Eigen::MatrixXd outer_product_columns(const Frame& f) {
  const Index n = f.dim();
  const Index m = f.count();
  Eigen::MatrixXd p(n * n, m);
  for (Index i = 0; i < m; ++i) {
    const Eigen::MatrixXd o = f.vector(i) * f.vector(i).transpose();
    p.col(i) = o.reshaped();
  }
  return p;
}

inline Eigen::VectorXd vec_identity(Index n) { return Eigen::MatrixXd::Identity(n, n).reshaped(); }

inline cone::ConeSettings cone_settings(const SolverOptions& opts) {
  cone::ConeSettings s;
  s.max_iterations = opts.max_iterations;
  s.abstol = opts.objective_tolerance;
  s.reltol = opts.objective_tolerance;
  s.feastol = opts.feasibility_tolerance;
  return s;
}

inline SolverStatus map_status(cone::ConeStatus s) {
  switch (s) {
    case cone::ConeStatus::optimal: return SolverStatus::optimal;
    case cone::ConeStatus::primal_infeasible:
    case cone::ConeStatus::dual_infeasible: return SolverStatus::infeasible;
    default: return SolverStatus::max_iter;
  }
}

// Builds the cone program for the three semidefinite problems. The
// variables are x = (u, t) for SDP 1/2 and x = (u, t, v) for SDP 3.
inline cone::ConeProgram build_program(const Frame& f, Method method) {
  const Index n = f.dim();
  const Index m = f.count();
  const Index nv = method == Method::sdp3 ? m + 2 : m + 1;
  const Eigen::MatrixXd p = outer_product_columns(f);
  const Eigen::VectorXd eye = vec_identity(n);

  cone::ConeProgram prog;
  prog.dims.nonneg = m;
  prog.dims.psd = {n, n};
  prog.c = Eigen::VectorXd::Zero(nv);
  prog.c(m) = 1.0;
  prog.g_nonneg = Eigen::MatrixXd::Zero(m, nv);
  prog.g_nonneg.leftCols(m) = -Eigen::MatrixXd::Identity(m, m);

  Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(n * n, nv);  // t I - S_u (+ I for sdp1)
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n * n, nv);  // S_u - ...
  upper.leftCols(m) = p;
  upper.col(m) = -eye;
  lower.leftCols(m) = -p;

  prog.h.nonneg = Eigen::VectorXd::Zero(m);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  switch (method) {
    case Method::sdp1:
      lower.col(m) = -eye;
      prog.h.psd = {id, -id};
      break;
    case Method::sdp2:
      prog.h.psd = {zero, -id};
      break;
    case Method::sdp3: {
      lower.col(m + 1) = eye;
      prog.c(m + 1) = -1.0;
      prog.h.psd = {zero, zero};
      prog.a = Eigen::MatrixXd::Zero(1, nv);
      prog.a.block(0, 0, 1, m) = f.vectors().colwise().squaredNorm();
      prog.b = Eigen::VectorXd::Constant(1, static_cast<double>(n));
      break;
    }
    case Method::qp4: throw InputError("build_program: QP 4 is not a cone program");
  }
  prog.g_psd = {upper, lower};
  if (prog.a.size() == 0) {
    prog.a.resize(0, nv);
    prog.b.resize(0);
  }
  return prog;
}

inline SpectralSummary summary_for(const Frame& f, const ScalingVector& u) {
  return summarize(scaled_frame_operator(f, u));
}

inline std::vector<std::string> rank_warnings(const Frame& f) {
  if (f.spans()) return {};
  return {"frame vectors do not span R^" + std::to_string(f.dim())};
}

inline SolverReport solve_sdp(const Frame& f, const SolverOptions& opts, Method method) {
  opts.validate();
  const Index m = f.count();
  const SpectralSummary before = summarize(frame_operator(f));
  std::vector<std::string> warnings = rank_warnings(f);

  if (method == Method::sdp2 && !f.spans()) {
    return SolverReport{method, ScalingVector::ones(m), kInfinity, before, before, SolverStatus::infeasible,
                        0, kInfinity, opts, warnings};
  }

  const cone::ConeProgram prog = build_program(f, method);
  const cone::ConeResult res = cone::solve(prog, cone_settings(opts));
  const SolverStatus status = map_status(res.status);
  const double kkt = std::max(res.primal_residual, res.dual_residual);

  Eigen::VectorXd raw = res.x.head(m).cwiseMax(0.0);
  if (status == SolverStatus::infeasible || !raw.allFinite() || raw.maxCoeff() <= 0.0) {
    return SolverReport{method, ScalingVector::ones(m), kInfinity, before, before, status,
                        res.iterations, kkt, opts, warnings};
  }
  ScalingVector u(raw);

  // Move the solver point onto the exact normalization of the problem.
  const Eigen::VectorXd lam = eigenvalues(scaled_frame_operator(f, u));
  const bool definite = lam(0) > psd_tolerance(lam);
  if (method == Method::sdp1 && definite) {
    u = rescale_to_form(u, f, RescaleTarget::sdp1_form);
  } else if (method == Method::sdp2 && definite) {
    u = rescale_to_form(u, f, RescaleTarget::sdp2_form);
  } else if (method == Method::sdp3) {
    const double tr = f.vectors().colwise().squaredNorm().dot(u.squared());
    u = ScalingVector(u.squared() * (static_cast<double>(f.dim()) / tr));
  }

  const SpectralSummary after = summary_for(f, u);
  double objective = 0.0;
  switch (method) {
    case Method::sdp1: objective = after.opnorm_dist; break;
    case Method::sdp2: objective = after.lambda_max; break;
    default: objective = after.gap; break;
  }
  return SolverReport{method, u, objective, before, after, status, res.iterations, kkt, opts, warnings};
}

}  // namespace detail

// min t  s.t.  (1 - t) I <= S_u <= (1 + t) I,  u >= 0
inline SolverReport solve_sdp1(const Frame& f, const SolverOptions& opts = {}) {
  return detail::solve_sdp(f, opts, Method::sdp1);
}

// min t  s.t.  I <= S_u <= t I,  u >= 0
inline SolverReport solve_sdp2(const Frame& f, const SolverOptions& opts = {}) {
  return detail::solve_sdp(f, opts, Method::sdp2);
}

// min t - v  s.t.  v I <= S_u <= t I,  sum u_i |f_i|^2 = N,  u >= 0
inline SolverReport solve_sdp3(const Frame& f, const SolverOptions& opts = {}) {
  return detail::solve_sdp(f, opts, Method::sdp3);
}

// Sum_ij u_i u_j <f_i,f_j>^2 - 2 sum_i u_i |f_i|^2 + N, which equals ||I - S_u||_F^2.
inline double qp4_objective_expansion(const Frame& f, const ScalingVector& u) {
  if (u.size() != f.count()) throw InputError("qp4_objective_expansion: length mismatch");
  const Eigen::MatrixXd gram = (f.vectors().transpose() * f.vectors()).cwiseAbs2();
  const Eigen::VectorXd& w = u.squared();
  return w.dot(gram * w) - 2.0 * f.vectors().colwise().squaredNorm().dot(w) + static_cast<double>(f.dim());
}

// min_{u >= 0} ||vec(I) - P u||, column i of P being vec(f_i f_i^T).
inline SolverReport solve_qp4(const Frame& f, const SolverOptions& opts = {}) {
  opts.validate();
  const Index m = f.count();
  const SpectralSummary before = summarize(frame_operator(f));
  const Eigen::MatrixXd p = detail::outer_product_columns(f);
  const Eigen::VectorXd target = detail::vec_identity(f.dim());
  const NnlsResult res = nnls(p, target, opts.max_iterations);

  const Eigen::VectorXd grad = p.transpose() * (p * res.x - target);
  double kkt = 0.0;
  for (Index i = 0; i < m; ++i) {
    kkt = std::max(kkt, res.x(i) > 0.0 ? std::abs(grad(i)) : std::max(0.0, -grad(i)));
  }
  const SolverStatus status =
      res.converged && kkt <= opts.feasibility_tolerance ? SolverStatus::optimal : SolverStatus::max_iter;
  const ScalingVector u(res.x);
  const SpectralSummary after = detail::summary_for(f, u);
  return SolverReport{Method::qp4,  u,      after.frobenius_dist, before, after, status, res.iterations,
                      kkt,          opts,   detail::rank_warnings(f)};
}

inline SolverReport solve(const Frame& f, Method method, const SolverOptions& opts = {}) {
  switch (method) {
    case Method::sdp1: return solve_sdp1(f, opts);
    case Method::sdp2: return solve_sdp2(f, opts);
    case Method::sdp3: return solve_sdp3(f, opts);
    case Method::qp4: return solve_qp4(f, opts);
  }
  throw InputError("solve: unknown method");
}

struct ScalabilityResult {
  bool scalable = false;
  std::optional<ScalingVector> scaling;
  double frobenius_objective = 0.0;
};

inline ScalabilityResult is_scalable(const Frame& f, double tol = 1e-6, const SolverOptions& opts = {}) {
  const SolverReport rep = solve_qp4(f, opts);
  if (rep.status != SolverStatus::optimal) {
    throw SolverError(std::string("is_scalable: QP 4 solver stopped with status ") + to_string(rep.status));
  }
  ScalabilityResult out;
  out.frobenius_objective = rep.objective;
  out.scalable = rep.objective <= tol;
  if (out.scalable) out.scaling = rep.scaling;
  return out;
}

}  // namespace framecond
