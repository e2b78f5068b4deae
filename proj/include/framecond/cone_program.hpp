#pragma once

// Primal-dual interior-point solver for small dense cone programs
//
//   minimize    c'x
//   subject to  G x + s = h,  A x = b,  s in K
//
// where K is a product of one nonnegative orthant and any number of
// positive semidefinite cones. The method is the homogeneous self-dual
// embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector
// step, following the conelp algorithm of Vandenberghe's CVXOPT.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "framecond/errors.hpp"

namespace framecond::cone {

using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeDims {
  Index nonneg = 0;
  std::vector<Index> psd;

  // Degree of the cone, i.e. the length of the identity element's trace.
  Index degree() const {
    Index d = nonneg;
    for (Index k : psd) d += k;
    return d;
  }
  Index flat_size() const {
    Index d = nonneg;
    for (Index k : psd) d += k * k;
    return d;
  }
};

struct ConeVector {
  Eigen::VectorXd nonneg;
  std::vector<Eigen::MatrixXd> psd;

  static ConeVector zeros(const ConeDims& dims) {
    ConeVector v;
    v.nonneg = Eigen::VectorXd::Zero(dims.nonneg);
    for (Index k : dims.psd) v.psd.push_back(Eigen::MatrixXd::Zero(k, k));
    return v;
  }
  static ConeVector identity(const ConeDims& dims) {
    ConeVector v;
    v.nonneg = Eigen::VectorXd::Ones(dims.nonneg);
    for (Index k : dims.psd) v.psd.push_back(Eigen::MatrixXd::Identity(k, k));
    return v;
  }

  ConeVector& operator+=(const ConeVector& o) {
    nonneg += o.nonneg;
    for (std::size_t j = 0; j < psd.size(); ++j) psd[j] += o.psd[j];
    return *this;
  }
  ConeVector& operator*=(double a) {
    nonneg *= a;
    for (auto& m : psd) m *= a;
    return *this;
  }
  void axpy(double a, const ConeVector& o) {
    nonneg += a * o.nonneg;
    for (std::size_t j = 0; j < psd.size(); ++j) psd[j] += a * o.psd[j];
  }

  Eigen::VectorXd flatten() const {
    Index n = nonneg.size();
    for (const auto& m : psd) n += m.size();
    Eigen::VectorXd out(n);
    out.head(nonneg.size()) = nonneg;
    Index off = nonneg.size();
    for (const auto& m : psd) {
      out.segment(off, m.size()) = m.reshaped();
      off += m.size();
    }
    return out;
  }
  static ConeVector unflatten(const ConeDims& dims, const Eigen::VectorXd& v) {
    ConeVector out;
    out.nonneg = v.head(dims.nonneg);
    Index off = dims.nonneg;
    for (Index k : dims.psd) {
      out.psd.push_back(v.segment(off, k * k).reshaped(k, k));
      off += k * k;
    }
    return out;
  }
};

inline double dot(const ConeVector& a, const ConeVector& b) {
  double s = a.nonneg.dot(b.nonneg);
  for (std::size_t j = 0; j < a.psd.size(); ++j) s += a.psd[j].cwiseProduct(b.psd[j]).sum();
  return s;
}

inline double norm(const ConeVector& a) { return std::sqrt(dot(a, a)); }

struct ConeProgram {
  ConeDims dims;
  Eigen::VectorXd c;
  // Rows of G acting on the orthant block: dims.nonneg x n.
  Eigen::MatrixXd g_nonneg;
  // One (k*k) x n matrix per semidefinite block; column j is the
  // column-major vec of the symmetric coefficient matrix of x_j.
  std::vector<Eigen::MatrixXd> g_psd;
  ConeVector h;
  Eigen::MatrixXd a;  // p x n, p may be 0
  Eigen::VectorXd b;

  Index num_vars() const { return c.size(); }

  ConeVector apply_g(const Eigen::VectorXd& x) const {
    ConeVector out;
    out.nonneg = g_nonneg * x;
    for (std::size_t j = 0; j < g_psd.size(); ++j) {
      const Index k = dims.psd[j];
      out.psd.push_back((g_psd[j] * x).reshaped(k, k));
    }
    return out;
  }

  Eigen::VectorXd apply_gt(const ConeVector& z) const {
    Eigen::VectorXd out = g_nonneg.transpose() * z.nonneg;
    for (std::size_t j = 0; j < g_psd.size(); ++j) out += g_psd[j].transpose() * z.psd[j].reshaped();
    return out;
  }

  Eigen::MatrixXd dense_g() const {
    Eigen::MatrixXd out(dims.flat_size(), num_vars());
    out.topRows(dims.nonneg) = g_nonneg;
    Index off = dims.nonneg;
    for (const auto& blk : g_psd) {
      out.middleRows(off, blk.rows()) = blk;
      off += blk.rows();
    }
    return out;
  }

  void validate() const {
    const Index n = num_vars();
    auto fail = [](const std::string& what) { throw InputError("ConeProgram: " + what); };
    if (n < 1) fail("no variables");
    if (g_nonneg.rows() != dims.nonneg || g_nonneg.cols() != n) fail("orthant block of G has wrong shape");
    if (g_psd.size() != dims.psd.size()) fail("wrong number of semidefinite blocks in G");
    for (std::size_t j = 0; j < g_psd.size(); ++j) {
      if (g_psd[j].rows() != dims.psd[j] * dims.psd[j] || g_psd[j].cols() != n) {
        fail("semidefinite block " + std::to_string(j) + " of G has wrong shape");
      }
    }
    if (h.nonneg.size() != dims.nonneg || h.psd.size() != dims.psd.size()) fail("h has wrong shape");
    if (a.cols() != n && a.rows() > 0) fail("A has wrong number of columns");
    if (a.rows() != b.size()) fail("A and b disagree in row count");
  }
};

struct ConeSettings {
  int max_iterations = 100;
  double abstol = 1e-7;
  double reltol = 1e-6;
  double feastol = 1e-7;
  double step = 0.99;
  double exponent = 3.0;
  int refinement = 3;  // most iterative refinement rounds per KKT solve
};

enum class ConeStatus { optimal, primal_infeasible, dual_infeasible, max_iterations, numerical_failure };

inline const char* to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::optimal: return "optimal";
    case ConeStatus::primal_infeasible: return "primal_infeasible";
    case ConeStatus::dual_infeasible: return "dual_infeasible";
    case ConeStatus::max_iterations: return "max_iterations";
    case ConeStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct ConeResult {
  ConeStatus status = ConeStatus::max_iterations;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  ConeVector s;
  ConeVector z;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;  // max(||Ax-b|| / max(1,||b||), ||Gx+s-h|| / max(1,||h||))
  double dual_residual = 0.0;    // ||A'y + G'z + c|| / max(1,||c||)
};

namespace detail {

// Nesterov-Todd scaling W, stored per block.
struct Scaling {
  Eigen::VectorXd d;               // orthant: W = diag(d)
  std::vector<Eigen::MatrixXd> r;  // psd: W(x) = r' x r
  std::vector<Eigen::MatrixXd> rti;

  static Scaling identity(const ConeDims& dims) {
    Scaling w;
    w.d = Eigen::VectorXd::Ones(dims.nonneg);
    for (Index k : dims.psd) {
      w.r.push_back(Eigen::MatrixXd::Identity(k, k));
      w.rti.push_back(Eigen::MatrixXd::Identity(k, k));
    }
    return w;
  }

  // W, W', W^{-1}, W^{-T} applied to a cone vector.
  ConeVector apply(const ConeVector& v, bool transpose, bool inverse) const {
    ConeVector out;
    if (inverse) {
      out.nonneg = v.nonneg.cwiseQuotient(d);
    } else {
      out.nonneg = v.nonneg.cwiseProduct(d);
    }
    for (std::size_t j = 0; j < v.psd.size(); ++j) {
      const Eigen::MatrixXd& m = inverse ? rti[j] : r[j];
      if (transpose == inverse) {
        out.psd.push_back(m.transpose() * v.psd[j] * m);
      } else {
        out.psd.push_back(m * v.psd[j] * m.transpose());
      }
    }
    return out;
  }
};

// Scaled point lambda = W z = W^{-T} s.
struct ScaledPoint {
  Eigen::VectorXd nonneg;
  std::vector<Eigen::VectorXd> psd;  // eigenvalues of the diagonal blocks

  double squared_norm() const {
    double s = nonneg.squaredNorm();
    for (const auto& l : psd) s += l.squaredNorm();
    return s;
  }
  ConeVector as_cone_vector() const {
    ConeVector v;
    v.nonneg = nonneg;
    for (const auto& l : psd) v.psd.push_back(l.asDiagonal());
    return v;
  }
};

inline std::optional<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) return std::nullopt;
  return Eigen::MatrixXd(llt.matrixL());
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Largest t such that v + t e is on the boundary of the cone, negated:
// returns -min eigenvalue over all blocks.
inline double max_step(const ConeVector& v) {
  double t = -std::numeric_limits<double>::infinity();
  if (v.nonneg.size() > 0) t = std::max(t, -v.nonneg.minCoeff());
  for (const auto& m : v.psd) t = std::max(t, -min_eigenvalue(m));
  return t;
}

// Solves the scaled KKT system
//   [ 0  A'  G'W^{-1} ] [ux]   [bx]
//   [ A  0   0        ] [uy] = [by]
//   [ G  0  -W'       ] [uz]   [bz]
// returning uz scaled as W uz.
class KktSolver {
 public:
  KktSolver(const ConeProgram& prog, const Eigen::MatrixXd& g_dense, const Scaling& w, int refinement = 0)
      : prog_(prog), w_(w), refinement_(refinement) {
    const Index n = prog.num_vars();
    gt_.resize(g_dense.rows(), n);
    for (Index j = 0; j < n; ++j) {
      ConeVector col = ConeVector::unflatten(prog.dims, g_dense.col(j));
      gt_.col(j) = w.apply(col, true, true).flatten();
    }
    const Index p = prog.a.rows();
    if (p > 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qa(prog.a.transpose());
      const Eigen::MatrixXd q = qa.householderQ() * Eigen::MatrixXd::Identity(n, n);
      q1_ = q.leftCols(p);
      q2_ = q.rightCols(n - p);
      r1_ = qa.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
      if (r1_.diagonal().cwiseAbs().minCoeff() <= 1e-14 * std::max(1.0, r1_.diagonal().cwiseAbs().maxCoeff())) {
        throw SolverError("cone program: rank(A) < p");
      }
      reduced_ = gt_ * q2_;
    } else {
      reduced_ = gt_;
    }
    qr_.compute(reduced_);
    const Index k = reduced_.cols();
    if (k > 0) {
      r2_ = qr_.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
      const Eigen::VectorXd diag = r2_.diagonal().cwiseAbs();
      if (reduced_.rows() < k || diag.minCoeff() <= 1e-14 * std::max(1.0, diag.maxCoeff())) {
        throw SolverError("cone program: rank([G; A]) < n");
      }
    }
  }

  // Solves A'uy + G'W^{-1}uz = bx, A ux = by, G ux - W'uz = bz. Up to
  // `refinement` rounds of iterative refinement follow; a correction is kept
  // only if it lowers the residual of the unreduced system.
  void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const ConeVector& bz, Eigen::VectorXd& ux,
             Eigen::VectorXd& uy, ConeVector& uz) const {
    solve_once(bx, by, bz, ux, uy, uz);
    if (refinement_ < 1) return;
    Eigen::VectorXd rx, ry;
    ConeVector rz;
    double res = residual(bx, by, bz, ux, uy, uz, rx, ry, rz);
    for (int round = 0; round < refinement_ && res > 0.0; ++round) {
      Eigen::VectorXd cx, cy;
      ConeVector cz;
      solve_once(rx, ry, rz, cx, cy, cz);
      Eigen::VectorXd nx = ux + cx;
      Eigen::VectorXd ny = uy.size() ? Eigen::VectorXd(uy + cy) : uy;
      ConeVector nz = uz;
      nz += cz;
      Eigen::VectorXd tx, ty;
      ConeVector tz;
      const double next = residual(bx, by, bz, nx, ny, nz, tx, ty, tz);
      if (!(next < res)) break;
      ux = std::move(nx);
      uy = std::move(ny);
      uz = std::move(nz);
      rx = std::move(tx);
      ry = std::move(ty);
      rz = std::move(tz);
      res = next;
    }
  }

 private:
  void solve_once(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const ConeVector& bz, Eigen::VectorXd& ux,
                  Eigen::VectorXd& uy, ConeVector& uz) const {
    const Index p = prog_.a.rows();
    const Eigen::VectorXd bzt = w_.apply(bz, true, true).flatten();
    const Eigen::VectorXd rhs = bx + gt_.transpose() * bzt;
    if (p > 0) {
      const Eigen::VectorXd w1 = r1_.transpose().triangularView<Eigen::Lower>().solve(by);
      const Eigen::VectorXd base = q1_ * w1;
      const Eigen::VectorXd g_base = gt_ * base;
      const Eigen::VectorXd red_rhs = q2_.transpose() * (rhs - gt_.transpose() * g_base);
      const Eigen::VectorXd w2 = normal_solve(red_rhs);
      ux = base + q2_ * w2;
      const Eigen::VectorXd resid = rhs - gt_.transpose() * (gt_ * ux);
      uy = r1_.triangularView<Eigen::Upper>().solve(q1_.transpose() * resid);
    } else {
      ux = normal_solve(rhs);
      uy.resize(0);
    }
    uz = ConeVector::unflatten(prog_.dims, gt_ * ux - bzt);
  }

  double residual(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const ConeVector& bz, const Eigen::VectorXd& ux,
                  const Eigen::VectorXd& uy, const ConeVector& uz, Eigen::VectorXd& rx, Eigen::VectorXd& ry,
                  ConeVector& rz) const {
    rx = bx - prog_.apply_gt(w_.apply(uz, false, true));
    ry = by;
    if (prog_.a.rows() > 0) {
      rx -= prog_.a.transpose() * uy;
      ry -= prog_.a * ux;
    }
    rz = bz;
    rz.axpy(-1.0, prog_.apply_g(ux));
    rz += w_.apply(uz, true, false);
    return std::sqrt(rx.squaredNorm() + ry.squaredNorm() + dot(rz, rz));
  }

  // Solves (R'R) w = v with R from the QR factor of the reduced matrix.
  Eigen::VectorXd normal_solve(const Eigen::VectorXd& v) const {
    if (v.size() == 0) return v;
    const Eigen::VectorXd t = r2_.transpose().triangularView<Eigen::Lower>().solve(v);
    return r2_.triangularView<Eigen::Upper>().solve(t);
  }

  const ConeProgram& prog_;
  const Scaling& w_;
  int refinement_;
  Eigen::MatrixXd gt_;
  Eigen::MatrixXd q1_, q2_, r1_, r2_;
  Eigen::MatrixXd reduced_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

// Symmetric product (a b + b a) / 2 on semidefinite blocks, Hadamard on the orthant.
inline ConeVector jordan_product(const ConeVector& a, const ConeVector& b) {
  ConeVector out;
  out.nonneg = a.nonneg.cwiseProduct(b.nonneg);
  for (std::size_t j = 0; j < a.psd.size(); ++j) out.psd.push_back(0.5 * (a.psd[j] * b.psd[j] + b.psd[j] * a.psd[j]));
  return out;
}

// Inverse of v -> lambda o v.
inline ConeVector lambda_divide(const ScaledPoint& lam, const ConeVector& v) {
  ConeVector out;
  out.nonneg = v.nonneg.cwiseQuotient(lam.nonneg);
  for (std::size_t j = 0; j < v.psd.size(); ++j) {
    const Eigen::VectorXd& l = lam.psd[j];
    const Index k = l.size();
    Eigen::MatrixXd m(k, k);
    for (Index c = 0; c < k; ++c)
      for (Index r = 0; r < k; ++r) m(r, c) = v.psd[j](r, c) * 2.0 / (l(r) + l(c));
    out.psd.push_back(m);
  }
  return out;
}

// Divides entrywise by sqrt(lambda_i lambda_j) so that max_step measures
// the step relative to the current scaled point.
inline ConeVector lambda_scale(const ScaledPoint& lam, const ConeVector& v) {
  ConeVector out;
  out.nonneg = v.nonneg.cwiseQuotient(lam.nonneg);
  for (std::size_t j = 0; j < v.psd.size(); ++j) {
    const Eigen::VectorXd sq = lam.psd[j].cwiseSqrt();
    out.psd.push_back(v.psd[j].cwiseQuotient(sq * sq.transpose()));
  }
  return out;
}

}  // namespace detail

inline ConeResult solve(const ConeProgram& prog, const ConeSettings& settings = {}) {
  using detail::ScaledPoint;
  using detail::Scaling;
  using Eigen::VectorXd;
  prog.validate();
  const ConeDims& dims = prog.dims;
  const Index n = prog.num_vars();
  const Index p = prog.a.rows();
  const Eigen::MatrixXd g_dense = prog.dense_g();
  const Eigen::MatrixXd& A = prog.a;
  const VectorXd& b = prog.b;
  const VectorXd& c = prog.c;
  const ConeVector& h = prog.h;
  const double nu = static_cast<double>(dims.degree());
  const ConeVector e = ConeVector::identity(dims);

  auto a_times = [&](const VectorXd& x) -> VectorXd { return p > 0 ? VectorXd(A * x) : VectorXd(0); };
  auto at_times = [&](const VectorXd& y) -> VectorXd {
    return p > 0 ? VectorXd(A.transpose() * y) : VectorXd(VectorXd::Zero(n));
  };

  ConeResult result;

  // Initial point from the identity scaling.
  Scaling w = Scaling::identity(dims);
  VectorXd x, y, ux, uy;
  ConeVector s, z, uz;
  {
    detail::KktSolver kkt(prog, g_dense, w);
    kkt.solve(VectorXd::Zero(n), b, h, x, uy, uz);
    s = uz;
    s *= -1.0;
    kkt.solve(-c, VectorXd::Zero(p), ConeVector::zeros(dims), ux, y, z);
  }
  {
    const double nrms = norm(s);
    const double ts = detail::max_step(s);
    if (ts >= -1e-8 * std::max(nrms, 1.0)) s.axpy(1.0 + ts, e);
    const double nrmz = norm(z);
    const double tz = detail::max_step(z);
    if (tz >= -1e-8 * std::max(nrmz, 1.0)) z.axpy(1.0 + tz, e);
  }
  const double resx0 = std::max(1.0, c.norm());
  const double resy0 = std::max(1.0, b.norm());
  const double resz0 = std::max(1.0, norm(h));

  double tau = 1.0;
  double kappa = 1.0;
  double gap = dot(s, z);
  ScaledPoint lam;
  double dg = 1.0, dgi = 1.0, lamg = 1.0;

  auto finish = [&](ConeStatus status, int it, double pcost, double dcost, double relgap, double pres, double dres) {
    result.status = status;
    result.iterations = it;
    result.x = x / tau;
    result.y = y / tau;
    result.s = s;
    result.s *= 1.0 / tau;
    result.z = z;
    result.z *= 1.0 / tau;
    result.primal_objective = pcost;
    result.dual_objective = dcost;
    result.gap = gap;
    result.relative_gap = relgap;
    result.primal_residual = pres;
    result.dual_residual = dres;
    return result;
  };

  for (int it = 0;; ++it) {
    const VectorXd hrx = -at_times(y) - prog.apply_gt(z);
    const double hresx = hrx.norm();
    const VectorXd rx = hrx - tau * c;
    const double resx = rx.norm() / tau;
    const VectorXd hry = a_times(x);
    const double hresy = hry.norm();
    const VectorXd ry = hry - tau * b;
    const double resy = ry.norm() / tau;
    ConeVector hrz = prog.apply_g(x);
    hrz += s;
    const double hresz = norm(hrz);
    ConeVector rz = hrz;
    rz.axpy(-tau, h);
    const double resz = norm(rz) / tau;
    const double cx = c.dot(x);
    const double by = p > 0 ? b.dot(y) : 0.0;
    const double hz = dot(h, z);
    const double rt = kappa + cx + by + hz;
    const double pcost = cx / tau;
    const double dcost = -(by + hz) / tau;
    double relgap = std::numeric_limits<double>::quiet_NaN();
    if (pcost < 0.0) {
      relgap = gap / -pcost;
    } else if (dcost > 0.0) {
      relgap = gap / dcost;
    }
    const double pres = std::max(resy / resy0, resz / resz0);
    const double dres = resx / resx0;
    const double pinfres = (hz + by < 0.0) ? hresx / resx0 / (-hz - by) : kInf;
    const double dinfres = (cx < 0.0) ? std::max(hresy / resy0, hresz / resz0) / (-cx) : kInf;

    if (pres <= settings.feastol && dres <= settings.feastol &&
        (gap <= settings.abstol || (!std::isnan(relgap) && relgap <= settings.reltol))) {
      return finish(ConeStatus::optimal, it, pcost, dcost, relgap, pres, dres);
    }
    if (pinfres <= settings.feastol) {
      return finish(ConeStatus::primal_infeasible, it, pcost, dcost, relgap, pres, dres);
    }
    if (dinfres <= settings.feastol) {
      return finish(ConeStatus::dual_infeasible, it, pcost, dcost, relgap, pres, dres);
    }
    if (it >= settings.max_iterations) {
      return finish(ConeStatus::max_iterations, it, pcost, dcost, relgap, pres, dres);
    }

    if (it == 0) {
      w.d = s.nonneg.cwiseQuotient(z.nonneg).cwiseSqrt();
      lam.nonneg = s.nonneg.cwiseProduct(z.nonneg).cwiseSqrt();
      for (std::size_t j = 0; j < dims.psd.size(); ++j) {
        auto ls = detail::cholesky(s.psd[j]);
        auto lz = detail::cholesky(z.psd[j]);
        if (!ls || !lz) return finish(ConeStatus::numerical_failure, it, pcost, dcost, relgap, pres, dres);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(lz->transpose() * *ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd isq = svd.singularValues().cwiseSqrt().cwiseInverse();
        w.r[j] = *ls * svd.matrixV() * isq.asDiagonal();
        w.rti[j] = *lz * svd.matrixU() * isq.asDiagonal();
        lam.psd.push_back(svd.singularValues());
      }
      dg = std::sqrt(kappa / tau);
      dgi = std::sqrt(tau / kappa);
      lamg = std::sqrt(tau * kappa);
    }

    std::optional<detail::KktSolver> kkt;
    try {
      kkt.emplace(prog, g_dense, w, settings.refinement);
    } catch (const SolverError&) {
      return finish(ConeStatus::numerical_failure, it, pcost, dcost, relgap, pres, dres);
    }

    VectorXd x1, y1;
    ConeVector z1;
    kkt->solve(-c, b, h, x1, y1, z1);
    x1 *= dgi;
    y1 *= dgi;
    z1 *= dgi;
    const ConeVector th = w.apply(h, true, true);
    const double z1sq = dot(z1, z1);

    // Solves the linearized Newton system for the embedding.
    struct Direction {
      VectorXd dx, dy;
      ConeVector dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto newton = [&](const VectorXd& bx, const VectorXd& by_in, const ConeVector& bz, double btau,
                      const ConeVector& bs, double bkappa) {
      Direction d;
      const VectorXd neg_by = -by_in;
      ConeVector s_ = detail::lambda_divide(lam, bs);
      s_ *= -1.0;
      ConeVector z_ = w.apply(s_, true, false);
      z_ += bz;
      z_ *= -1.0;
      kkt->solve(bx, neg_by, z_, d.dx, d.dy, d.dz);
      double kap = -bkappa / lamg;
      double t_ = btau + kap / dgi;
      t_ = dgi * (t_ + c.dot(d.dx) + (p > 0 ? b.dot(d.dy) : 0.0) + dot(th, d.dz)) / (1.0 + z1sq);
      d.dx += t_ * x1;
      if (p > 0) d.dy += t_ * y1;
      d.dz.axpy(t_, z1);
      s_.axpy(-1.0, d.dz);
      d.ds = s_;
      d.dtau = t_;
      d.dkappa = kap - t_;
      return d;
    };

    const double mu = (lam.squared_norm() + lamg * lamg) / (nu + 1.0);
    double sigma = 0.0;
    double step = 0.0;
    Direction dir;
    ConeVector ws3;
    double wk3 = 0.0;
    const ConeVector lamsq = detail::jordan_product(lam.as_cone_vector(), lam.as_cone_vector());
    for (int pass = 0; pass < 2; ++pass) {
      ConeVector bs = lamsq;
      double bk = lamg * lamg;
      if (pass == 1) {
        bs += ws3;
        bs.axpy(-sigma * mu, e);
        bk += wk3 - sigma * mu;
      }
      ConeVector rzs = rz;
      rzs *= (1.0 - sigma);
      dir = newton((1.0 - sigma) * rx, (1.0 - sigma) * ry, rzs, (1.0 - sigma) * rt, bs, bk);
      if (pass == 0) {
        ws3 = detail::jordan_product(dir.ds, dir.dz);
        wk3 = dir.dtau * dir.dkappa;
      }
      const double ts = detail::max_step(detail::lambda_scale(lam, dir.ds));
      const double tz = detail::max_step(detail::lambda_scale(lam, dir.dz));
      const double tt = -dir.dtau / lamg;
      const double tk = -dir.dkappa / lamg;
      const double t = std::max({0.0, ts, tz, tt, tk});
      if (t == 0.0) {
        step = 1.0;
      } else if (pass == 0) {
        step = std::min(1.0, 1.0 / t);
      } else {
        step = std::min(1.0, settings.step / t);
      }
      if (pass == 0) sigma = std::pow(1.0 - step, settings.exponent);
    }

    x += step * dir.dx;
    if (p > 0) y += step * dir.dy;

    // Update the scaling and the scaled point.
    {
      const VectorXd sn = lam.nonneg + step * dir.ds.nonneg;
      const VectorXd zn = lam.nonneg + step * dir.dz.nonneg;
      w.d = w.d.cwiseProduct(sn.cwiseQuotient(zn).cwiseSqrt());
      lam.nonneg = sn.cwiseProduct(zn).cwiseSqrt();
    }
    for (std::size_t j = 0; j < dims.psd.size(); ++j) {
      const Eigen::MatrixXd base = lam.psd[j].asDiagonal();
      const Eigen::MatrixXd sn = base + step * 0.5 * (dir.ds.psd[j] + dir.ds.psd[j].transpose());
      const Eigen::MatrixXd zn = base + step * 0.5 * (dir.dz.psd[j] + dir.dz.psd[j].transpose());
      auto ls = detail::cholesky(sn);
      auto lz = detail::cholesky(zn);
      if (!ls || !lz) return finish(ConeStatus::numerical_failure, it, pcost, dcost, relgap, pres, dres);
      const Eigen::MatrixXd r = w.r[j] * *ls;
      const Eigen::MatrixXd rti = w.rti[j] * *lz;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(lz->transpose() * *ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const VectorXd isq = svd.singularValues().cwiseSqrt().cwiseInverse();
      w.r[j] = r * svd.matrixV() * isq.asDiagonal();
      w.rti[j] = rti * svd.matrixU() * isq.asDiagonal();
      lam.psd[j] = svd.singularValues();
    }
    {
      const double tt = -dir.dtau / lamg;
      const double tk = -dir.dkappa / lamg;
      dg *= std::sqrt(1.0 - step * tk) / std::sqrt(1.0 - step * tt);
      dgi = 1.0 / dg;
      lamg *= std::sqrt(1.0 - step * tt) * std::sqrt(1.0 - step * tk);
    }
    const ConeVector ld = lam.as_cone_vector();
    s = w.apply(ld, true, false);
    z = w.apply(ld, false, true);
    kappa = lamg / dgi;
    tau = lamg * dgi;
    gap = lam.squared_norm() / (tau * tau);
    if (!std::isfinite(gap) || !x.allFinite()) {
      return finish(ConeStatus::numerical_failure, it + 1, pcost, dcost, relgap, pres, dres);
    }
  }
}

}  // namespace framecond::cone
