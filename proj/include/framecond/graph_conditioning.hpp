#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "framecond/conditioners.hpp"
#include "framecond/errors.hpp"
#include "framecond/frame.hpp"
#include "framecond/graph.hpp"
#include "framecond/spectral.hpp"

namespace framecond {

struct GraphConditionReport {
  Method method;
  Eigen::VectorXd edge_scalings;        // u, so that the conditioned weight of edge k is w_k u_k
  SymMatrix conditioned_laplacian;      // B diag(u) B'
  Eigen::VectorXd trace_matched_scalings;  // u rescaled so trace of the Laplacian is preserved
  SymMatrix trace_matched_laplacian;
  SpectralSummary before;  // of L0
  SpectralSummary after;   // of the projected conditioned Laplacian
  double objective;
  SolverStatus status;
  int iterations;
  double kkt_residual;
  SolverOptions options;
};

// Columns of Ftilde' B, one vector in R^{N-1} per edge.
inline Frame graph_frame(const WeightedGraph& g) {
  if (!g.is_connected()) throw PreconditionError("graph is disconnected");
  if (g.edge_count() < g.vertex_count() - 1) throw PreconditionError("graph has too few edges to be connected");
  const ProjectedLaplacian pl = projected_laplacian(laplacian(g));
  return Frame(pl.basis.transpose() * incidence_matrix(g));
}

// Graph with edge k reweighted to w_k u_k; edges whose scaling is zero are dropped.
inline WeightedGraph conditioned_graph(const WeightedGraph& g, const Eigen::VectorXd& scalings) {
  if (scalings.size() != g.edge_count()) throw InputError("conditioned_graph: scaling count does not match edge count");
  std::vector<Edge> edges;
  for (Index k = 0; k < g.edge_count(); ++k) {
    Edge e = g.edges()[static_cast<std::size_t>(k)];
    e.w *= scalings(k);
    if (e.w > 0.0) edges.push_back(e);
  }
  return WeightedGraph(g.vertex_count(), std::move(edges));
}

namespace detail {

inline GraphConditionReport condition_graph(const WeightedGraph& g, const SolverOptions& opts, Method method) {
  const Frame f = graph_frame(g);
  const SolverReport rep = solve(f, method, opts);
  const Eigen::MatrixXd b = incidence_matrix(g);
  const Eigen::VectorXd u = rep.scaling.squared();
  SymMatrix lt(b * u.asDiagonal() * b.transpose());
  const double factor = laplacian(g).trace() / lt.trace();
  const Eigen::VectorXd tm = factor * u;
  SymMatrix ltm(b * tm.asDiagonal() * b.transpose());
  return GraphConditionReport{method,     u,          std::move(lt), tm,             std::move(ltm),
                              rep.before, rep.after,  rep.objective, rep.status,     rep.iterations,
                              rep.kkt_residual, opts};
}

}  // namespace detail

// Minimizes the condition number of the projected Laplacian over edge
// scalings, with the raw solution normalized to lambda_min = 1.
inline GraphConditionReport graph_condition(const WeightedGraph& g, const SolverOptions& opts = {}) {
  return detail::condition_graph(g, opts, Method::sdp2);
}

// Minimizes lambda_max - lambda_min of the projected Laplacian with its
// trace fixed at N - 1.
inline GraphConditionReport graph_gap(const WeightedGraph& g, const SolverOptions& opts = {}) {
  return detail::condition_graph(g, opts, Method::sdp3);
}

}  // namespace framecond
