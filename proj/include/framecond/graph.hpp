#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "framecond/errors.hpp"
#include "framecond/spectral.hpp"

namespace framecond {

struct Edge {
  Index u = 0;  // u < v after construction
  Index v = 0;
  double w = 1.0;
};

// Undirected graph with positive edge weights. Edge order is preserved;
// each edge is stored with u < v.
class WeightedGraph {
 public:
  WeightedGraph(Index vertex_count, std::vector<Edge> edges) : n_(vertex_count), edges_(std::move(edges)) {
    if (n_ < 2) throw InputError("WeightedGraph: need at least 2 vertices");
    std::set<std::pair<Index, Index>> seen;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      Edge& e = edges_[k];
      const std::string where = "WeightedGraph: edge " + std::to_string(k) + " ";
      if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_) throw InputError(where + "has a vertex out of range");
      if (e.u == e.v) throw InputError(where + "is a self-loop");
      if (!(e.w > 0.0) || !std::isfinite(e.w)) throw InputError(where + "has a nonpositive or non-finite weight");
      if (e.u > e.v) std::swap(e.u, e.v);
      if (!seen.insert({e.u, e.v}).second) throw InputError(where + "duplicates an earlier edge");
    }
  }

  Index vertex_count() const noexcept { return n_; }
  Index edge_count() const noexcept { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool is_connected() const {
    std::vector<Index> parent(static_cast<std::size_t>(n_));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    Index components = n_;
    for (const Edge& e : edges_) {
      const Index a = find(e.u);
      const Index b = find(e.v);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    return components == 1;
  }

  // Same topology with edge k reweighted to weights(k).
  WeightedGraph reweighted(const Eigen::VectorXd& weights) const {
    if (weights.size() != edge_count()) throw InputError("reweighted: weight count does not match edge count");
    std::vector<Edge> out = edges_;
    for (std::size_t k = 0; k < out.size(); ++k) out[k].w = weights(static_cast<Index>(k));
    return WeightedGraph(n_, std::move(out));
  }

  Eigen::VectorXd weights() const {
    Eigen::VectorXd w(edge_count());
    for (std::size_t k = 0; k < edges_.size(); ++k) w(static_cast<Index>(k)) = edges_[k].w;
    return w;
  }

 private:
  Index n_;
  std::vector<Edge> edges_;
};

// Column k is sqrt(w_k) (e_u - e_v) for edge k = (u, v, w), u < v.
inline Eigen::MatrixXd incidence_matrix(const WeightedGraph& g) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(g.vertex_count(), g.edge_count());
  for (Index k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[static_cast<std::size_t>(k)];
    const double r = std::sqrt(e.w);
    b(e.u, k) = r;
    b(e.v, k) = -r;
  }
  return b;
}

// Degree minus adjacency.
inline SymMatrix laplacian(const WeightedGraph& g) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g.vertex_count(), g.vertex_count());
  for (const Edge& e : g.edges()) {
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
    l(e.u, e.v) -= e.w;
    l(e.v, e.u) -= e.w;
  }
  return SymMatrix(l);
}

struct ProjectedLaplacian {
  SymMatrix reduced;      // L0 = Ftilde' L Ftilde, order N - 1
  Eigen::MatrixXd basis;  // Ftilde, N x (N - 1)
  Eigen::VectorXd nonzero_eigenvalues;
};

inline ProjectedLaplacian projected_laplacian(const SymMatrix& l) {
  const Index n = l.order();
  if (n < 2) throw InputError("projected_laplacian: need order at least 2");
  const EigenDecomposition eig = sym_eig(l);
  const double tol = psd_tolerance(eig.eigenvalues);
  if (!(eig.eigenvalues(1) > tol)) {
    throw PreconditionError("projected_laplacian: zero eigenvalue is repeated (graph is disconnected)");
  }
  Eigen::MatrixXd basis = eig.eigenvectors.rightCols(n - 1);
  SymMatrix reduced(basis.transpose() * l.matrix() * basis);
  return {std::move(reduced), std::move(basis), eig.eigenvalues.tail(n - 1)};
}

// L^+ from (L + J/N)^{-1} - J/N.
inline Eigen::MatrixXd laplacian_pseudoinverse(const WeightedGraph& g) {
  if (!g.is_connected()) throw PreconditionError("laplacian_pseudoinverse: graph is disconnected");
  const Index n = g.vertex_count();
  const Eigen::MatrixXd j = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd shifted = laplacian(g).matrix() + j;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw SolverError("laplacian_pseudoinverse: factorization failed");
  Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  inv -= j;
  return 0.5 * (inv + inv.transpose());
}

inline double resistance_from_pseudoinverse(const Eigen::MatrixXd& lp, Index i, Index j) {
  if (i == j) return 0.0;
  return lp(i, i) + lp(j, j) - 2.0 * lp(i, j);
}

inline void check_vertex(const WeightedGraph& g, Index i, const char* who) {
  if (i < 0 || i >= g.vertex_count()) throw InputError(std::string(who) + ": vertex out of range");
}

// (e_i - e_j)' L^+ (e_i - e_j); 0 when i == j.
inline double effective_resistance(const WeightedGraph& g, Index i, Index j) {
  check_vertex(g, i, "effective_resistance");
  check_vertex(g, j, "effective_resistance");
  const Eigen::MatrixXd lp = laplacian_pseudoinverse(g);
  return resistance_from_pseudoinverse(lp, i, j);
}

// sum_k (f_k(i) - f_k(j))^2 / lambda_k over the nonzero Laplacian spectrum.
inline double effective_resistance_eigensum(const WeightedGraph& g, Index i, Index j) {
  check_vertex(g, i, "effective_resistance_eigensum");
  check_vertex(g, j, "effective_resistance_eigensum");
  if (!g.is_connected()) throw PreconditionError("effective_resistance_eigensum: graph is disconnected");
  if (i == j) return 0.0;
  const ProjectedLaplacian pl = projected_laplacian(laplacian(g));
  double r = 0.0;
  for (Index k = 0; k < pl.basis.cols(); ++k) {
    const double d = pl.basis(i, k) - pl.basis(j, k);
    r += d * d / pl.nonzero_eigenvalues(k);
  }
  return r;
}

inline Eigen::MatrixXd resistance_matrix(const WeightedGraph& g) {
  const Eigen::MatrixXd lp = laplacian_pseudoinverse(g);
  const Index n = g.vertex_count();
  Eigen::MatrixXd r(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) r(i, j) = resistance_from_pseudoinverse(lp, i, j);
  return r;
}

struct ResistanceSummary {
  double total = 0.0;    // over ordered pairs
  double average = 0.0;  // total / (N (N - 1))
};

inline ResistanceSummary resistance_summary(const WeightedGraph& g) {
  const Eigen::MatrixXd r = resistance_matrix(g);
  const double n = static_cast<double>(g.vertex_count());
  ResistanceSummary s;
  s.total = r.sum();
  s.average = s.total / (n * (n - 1.0));
  return s;
}

}  // namespace framecond
