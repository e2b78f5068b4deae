#pragma once

// Command dispatch shared by the framecond executable and its tests.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "framecond/conditioners.hpp"
#include "framecond/errors.hpp"
#include "framecond/experiment.hpp"
#include "framecond/frame.hpp"
#include "framecond/graph.hpp"
#include "framecond/graph_conditioning.hpp"
#include "framecond/io.hpp"

namespace framecond::cli {

enum class Command {
  frame_analyze,
  frame_scale,
  frame_scalable,
  graph_condition,
  graph_gap,
  graph_resistance,
  experiment_conjecture,
};

inline const char* to_string(Command c) {
  switch (c) {
    case Command::frame_analyze: return "frame analyze";
    case Command::frame_scale: return "frame scale";
    case Command::frame_scalable: return "frame scalable";
    case Command::graph_condition: return "graph condition";
    case Command::graph_gap: return "graph gap";
    case Command::graph_resistance: return "graph resistance";
    case Command::experiment_conjecture: return "experiment conjecture";
  }
  return "unknown";
}

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int parse = 2;
inline constexpr int infeasible = 3;
inline constexpr int max_iter = 4;
inline constexpr int output = 5;
inline constexpr int failure = 6;
}  // namespace exit_code

struct RunConfig {
  Command command = Command::frame_analyze;
  std::string input;          // frame CSV or graph edge list
  Method method = Method::sdp1;
  SolverOptions options;      // options.seed also seeds the experiment
  double scalable_tolerance = 1e-6;
  std::string report_path;    // empty writes to stdout
  std::string dot_path;       // graph condition / graph gap only
  std::string generator;      // experiment only
  int trials = 1;
};

namespace detail {

inline ReportDocument with_header(const RunConfig& cfg, const ReportDocument& body) {
  ReportDocument doc;
  doc.set("command", to_string(cfg.command));
  if (!cfg.input.empty()) doc.set("input", cfg.input);
  for (const auto& [k, v] : body.entries()) doc.set(k, v);
  return doc;
}

inline int status_code(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return exit_code::ok;
    case SolverStatus::infeasible: return exit_code::infeasible;
    case SolverStatus::max_iter: return exit_code::max_iter;
  }
  return exit_code::failure;
}

inline ReportDocument frame_analyze(const Frame& f) {
  ReportDocument doc;
  doc.set_int("frame.dim", f.dim());
  doc.set_int("frame.count", f.count());
  doc.set_bool("frame.spans", f.spans());
  add_summary(doc, "frame", summarize(frame_operator(f)));
  return doc;
}

inline ReportDocument frame_scalable(const Frame& f, const RunConfig& cfg) {
  const ScalabilityResult r = is_scalable(f, cfg.scalable_tolerance, cfg.options);
  ReportDocument doc;
  doc.set_bool("scalable", r.scalable);
  doc.set_real("frobenius_objective", r.frobenius_objective);
  doc.set_sci("tolerance", cfg.scalable_tolerance);
  add_options(doc, cfg.options);
  if (r.scaling) {
    doc.set_vector("scaling.u", r.scaling->squared());
    doc.set_vector("scaling.s", r.scaling->scales());
  }
  return doc;
}

inline ReportDocument graph_resistance(const WeightedGraph& g) {
  const ResistanceSummary s = resistance_summary(g);
  const Eigen::MatrixXd r = resistance_matrix(g);
  ReportDocument doc;
  doc.set_int("graph.vertices", g.vertex_count());
  doc.set_int("graph.edges", g.edge_count());
  doc.set_real("resistance.total", s.total);
  doc.set_real("resistance.average", s.average);
  for (Index i = 0; i < g.vertex_count(); ++i)
    for (Index j = i + 1; j < g.vertex_count(); ++j)
      doc.set_real("resistance." + std::to_string(i) + "." + std::to_string(j), r(i, j));
  return doc;
}

}  // namespace detail

// Runs one command and returns its exit code. Reports go to
// cfg.report_path, or to out when no path is given; diagnostics go to err.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  ReportDocument body;
  int code = exit_code::ok;
  std::optional<WeightedGraph> dot_graph;
  Eigen::VectorXd dot_weights;
  try {
    cfg.options.validate();
    switch (cfg.command) {
      case Command::frame_analyze: body = detail::frame_analyze(parse_frame_file(cfg.input)); break;
      case Command::frame_scale: {
        const SolverReport r = solve(parse_frame_file(cfg.input), cfg.method, cfg.options);
        body = to_document(r);
        code = detail::status_code(r.status);
        break;
      }
      case Command::frame_scalable: body = detail::frame_scalable(parse_frame_file(cfg.input), cfg); break;
      case Command::graph_condition:
      case Command::graph_gap: {
        WeightedGraph g = parse_graph_file(cfg.input);
        if (!g.is_connected()) throw InputError(cfg.input + ": graph is disconnected");
        const GraphConditionReport r =
            cfg.command == Command::graph_condition ? graph_condition(g, cfg.options) : graph_gap(g, cfg.options);
        body = to_document(r, g);
        code = detail::status_code(r.status);
        dot_weights = g.weights().cwiseProduct(r.trace_matched_scalings);
        dot_graph = std::move(g);
        break;
      }
      case Command::graph_resistance: {
        const WeightedGraph g = parse_graph_file(cfg.input);
        if (!g.is_connected()) throw InputError(cfg.input + ": graph is disconnected");
        body = detail::graph_resistance(g);
        break;
      }
      case Command::experiment_conjecture: {
        const GraphGenerator gen = parse_generator(cfg.generator);
        body = to_document(conjecture_experiment(gen, cfg.trials, cfg.options.seed, cfg.options));
        break;
      }
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::parse;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::parse;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::parse;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::parse;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::failure;
  }

  const ReportDocument doc = detail::with_header(cfg, body);
  try {
    if (cfg.report_path.empty()) {
      out << doc.str();
    } else {
      emit_report(doc, cfg.report_path);
    }
    if (!cfg.dot_path.empty()) {
      if (!dot_graph) {
        err << "warning: --dot applies only to graph condition and graph gap\n";
      } else {
        emit_dot(*dot_graph, dot_weights, cfg.dot_path);
      }
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::output;
  }
  if (code == exit_code::infeasible) err << "error: problem is infeasible\n";
  if (code == exit_code::max_iter) err << "error: solver stopped before convergence\n";
  return code;
}

}  // namespace framecond::cli
