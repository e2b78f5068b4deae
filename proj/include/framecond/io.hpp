#pragma once

// Text formats: CSV frames, edge-list graphs, key-value reports, dot figures.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "framecond/conditioners.hpp"
#include "framecond/errors.hpp"
#include "framecond/experiment.hpp"
#include "framecond/frame.hpp"
#include "framecond/graph.hpp"
#include "framecond/graph_conditioning.hpp"

namespace framecond {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace detail

// Row r, column c of the CSV is coordinate r of frame vector c.
inline Frame parse_frame_text(const std::string& text, const std::string& source = "<frame>") {
  std::vector<std::vector<double>> rows;
  const std::vector<std::string> lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = detail::trim(lines[ln]);
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (std::size_t col = 1;; ++col) {
      const std::size_t comma = line.find(',', start);
      const std::string_view tok = detail::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      double v = 0.0;
      if (!detail::parse_number(tok, v) || !std::isfinite(v)) {
        throw ParseError(source, ln + 1, col, "expected a finite number, got '" + std::string(tok) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source, ln + 1, 0,
                       "row has " + std::to_string(row.size()) + " columns, expected " +
                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source, 0, 0, "no data rows");
  const Index n = static_cast<Index>(rows.size());
  const Index m = static_cast<Index>(rows.front().size());
  Eigen::MatrixXd x(n, m);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < m; ++c) x(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  for (Index c = 0; c < m; ++c) {
    if (x.col(c).squaredNorm() == 0.0) {
      throw ParseError(source, 0, static_cast<std::size_t>(c) + 1, "column " + std::to_string(c + 1) + " is the zero vector");
    }
  }
  try {
    return Frame(std::move(x));
  } catch (const InputError& e) {
    throw ParseError(source, 0, 0, e.what());
  }
}

inline Frame parse_frame_file(const std::string& path) { return parse_frame_text(detail::read_file(path), path); }

// Lines "u v [w]" with 0-based vertices, '#' comments, optional header "n N".
inline WeightedGraph parse_graph_text(const std::string& text, const std::string& source = "<graph>") {
  std::vector<Edge> edges;
  std::map<std::pair<Index, Index>, std::size_t> seen;
  Index header_n = -1;
  std::size_t header_line = 0;
  Index max_index = -1;
  std::size_t max_index_line = 0;
  const std::vector<std::string> lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (const std::size_t hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    if (tokens.empty()) continue;
    const std::size_t lineno = ln + 1;
    if (tokens[0] == "n") {
      long long n = 0;
      if (tokens.size() != 2 || !detail::parse_number(tokens[1], n) || n < 2) {
        throw ParseError(source, lineno, 0, "header must be 'n N' with N >= 2");
      }
      if (header_n >= 0) throw ParseError(source, lineno, 0, "repeated 'n' header");
      header_n = static_cast<Index>(n);
      header_line = lineno;
      continue;
    }
    if (tokens.size() < 2 || tokens.size() > 3) {
      throw ParseError(source, lineno, 0, "expected 'u v' or 'u v w'");
    }
    long long u = 0, v = 0;
    if (!detail::parse_number(tokens[0], u) || u < 0) throw ParseError(source, lineno, 1, "bad vertex index '" + std::string(tokens[0]) + "'");
    if (!detail::parse_number(tokens[1], v) || v < 0) throw ParseError(source, lineno, 2, "bad vertex index '" + std::string(tokens[1]) + "'");
    double w = 1.0;
    if (tokens.size() == 3) {
      if (!detail::parse_number(tokens[2], w) || !std::isfinite(w)) {
        throw ParseError(source, lineno, 3, "bad weight '" + std::string(tokens[2]) + "'");
      }
      if (!(w > 0.0)) throw ParseError(source, lineno, 3, "weight must be positive");
    }
    if (u == v) throw ParseError(source, lineno, 0, "self-loop at vertex " + std::to_string(u));
    const auto key = std::make_pair(static_cast<Index>(std::min(u, v)), static_cast<Index>(std::max(u, v)));
    if (auto it = seen.find(key); it != seen.end()) {
      throw ParseError(source, lineno, 0, "duplicate edge, first given on line " + std::to_string(it->second));
    }
    seen.emplace(key, lineno);
    edges.push_back({static_cast<Index>(u), static_cast<Index>(v), w});
    if (key.second > max_index) {
      max_index = key.second;
      max_index_line = lineno;
    }
  }
  if (edges.empty() && header_n < 0) throw ParseError(source, 0, 0, "no edges");
  Index n = max_index + 1;
  if (header_n >= 0) {
    if (max_index >= header_n) {
      throw ParseError(source, max_index_line, 0,
                       "vertex " + std::to_string(max_index) + " exceeds header 'n " + std::to_string(header_n) +
                           "' on line " + std::to_string(header_line));
    }
    n = header_n;
  }
  if (n < 2) throw ParseError(source, 0, 0, "graph needs at least 2 vertices");
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph parse_graph_file(const std::string& path) { return parse_graph_text(detail::read_file(path), path); }

// Edge list with a header line and full-precision weights.
inline std::string format_graph(const WeightedGraph& g) {
  std::string out = "n " + std::to_string(g.vertex_count()) + "\n";
  char buf[96];
  for (const Edge& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(e.u), static_cast<long long>(e.v), e.w);
    out += buf;
  }
  return out;
}

inline void write_graph_file(const WeightedGraph& g, const std::string& path) { detail::write_file(path, format_graph(g)); }

// At least six significant figures and at least six decimals; magnitudes
// below 1e-12 print as zero, below 1e-10 in scientific notation.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::abs(x) < 1e-12) return "0.000000";
  char buf[64];
  const int digits = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const int precision = std::max(6, 5 - digits);
  if (precision > 15) {
    std::snprintf(buf, sizeof buf, "%.5e", x);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  }
  return buf;
}

inline std::string format_sci(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// Ordered "key = value" lines.
class ReportDocument {
 public:
  void set(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
  void set_real(const std::string& key, double v) { set(key, format_real(v)); }
  void set_sci(const std::string& key, double v) { set(key, format_sci(v)); }
  void set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }
  void set_bool(const std::string& key, bool v) { set(key, v ? "true" : "false"); }
  void set_vector(const std::string& key, const Eigen::VectorXd& v) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += format_real(v(i));
    }
    set(key, s);
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string str() const {
    std::string out = "# framecond report\n";
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Inverse of ReportDocument::str for a single document.
inline std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> out;
  for (const std::string& raw : detail::split_lines(text)) {
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find(" = ");
    if (eq == line.npos) continue;
    out[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
  }
  return out;
}

inline void add_summary(ReportDocument& doc, const std::string& prefix, const SpectralSummary& s) {
  doc.set_real(prefix + ".lambda_min", s.lambda_min);
  doc.set_real(prefix + ".lambda_max", s.lambda_max);
  doc.set_real(prefix + ".condition_number", s.condition_number);
  doc.set_real(prefix + ".gap", s.gap);
  doc.set_real(prefix + ".relative_gap", s.relative_gap);
  doc.set_real(prefix + ".frobenius_dist", s.frobenius_dist);
  doc.set_real(prefix + ".opnorm_dist", s.opnorm_dist);
  doc.set_real(prefix + ".trace", s.trace);
  doc.set_vector(prefix + ".eigenvalues", s.eigenvalues);
}

inline void add_options(ReportDocument& doc, const SolverOptions& o) {
  doc.set_int("options.max_iterations", o.max_iterations);
  doc.set_sci("options.objective_tolerance", o.objective_tolerance);
  doc.set_sci("options.feasibility_tolerance", o.feasibility_tolerance);
  doc.set("options.seed", std::to_string(o.seed));
}

inline ReportDocument to_document(const SolverReport& r) {
  ReportDocument doc;
  doc.set("method", to_string(r.method));
  doc.set("status", to_string(r.status));
  doc.set_int("iterations", r.iterations);
  doc.set_real("objective", r.objective);
  doc.set_sci("kkt_residual", r.kkt_residual);
  add_options(doc, r.options);
  add_summary(doc, "before", r.before);
  add_summary(doc, "after", r.after);
  doc.set_vector("scaling.u", r.scaling.squared());
  doc.set_vector("scaling.s", r.scaling.scales());
  for (const std::string& w : r.warnings) doc.set("warning", w);
  return doc;
}

inline ReportDocument to_document(const GraphConditionReport& r, const WeightedGraph& g) {
  ReportDocument doc;
  doc.set("method", to_string(r.method));
  doc.set("status", to_string(r.status));
  doc.set_int("iterations", r.iterations);
  doc.set_real("objective", r.objective);
  doc.set_sci("kkt_residual", r.kkt_residual);
  add_options(doc, r.options);
  doc.set_int("graph.vertices", g.vertex_count());
  doc.set_int("graph.edges", g.edge_count());
  add_summary(doc, "before", r.before);
  add_summary(doc, "after", r.after);
  doc.set_vector("scaling.u", r.edge_scalings);
  doc.set_vector("scaling.s", r.edge_scalings.cwiseSqrt());
  doc.set_vector("scaling.trace_matched_u", r.trace_matched_scalings);
  doc.set("edges.columns", "u v weight scaling_u trace_matched_u");
  for (Index k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[static_cast<std::size_t>(k)];
    doc.set("edge." + std::to_string(k), std::to_string(e.u) + " " + std::to_string(e.v) + " " + format_real(e.w) + " " +
                                             format_real(r.edge_scalings(k)) + " " +
                                             format_real(r.trace_matched_scalings(k)));
  }
  const Eigen::VectorXd lt = eigenvalues(r.trace_matched_laplacian);
  doc.set_vector("trace_matched.laplacian_eigenvalues", lt);
  return doc;
}

inline ReportDocument to_document(const ExperimentReport& r) {
  ReportDocument doc;
  doc.set("experiment", "conjecture");
  doc.set("generator", r.generator.describe());
  doc.set_int("trials", r.trials);
  doc.set("seed", std::to_string(r.seed));
  doc.set_int("solved", r.solved);
  doc.set_real("decrease_fraction", r.decrease_fraction);
  doc.set_real("relative_change.mean", r.mean_relative_change);
  doc.set_real("relative_change.min", r.min_relative_change);
  doc.set_real("relative_change.max", r.max_relative_change);
  doc.set("trial.columns",
          "attempts vertices edges kappa_before kappa_after average_before average_after decreased status");
  for (const TrialResult& t : r.rows) {
    doc.set("trial." + std::to_string(t.trial),
            std::to_string(t.attempts) + " " + std::to_string(t.vertices) + " " + std::to_string(t.edges) + " " +
                format_real(t.kappa_before) + " " + format_real(t.kappa_after) + " " + format_real(t.average_before) +
                " " + format_real(t.average_after) + " " + (t.decreased ? "true" : "false") + " " +
                to_string(t.status));
  }
  return doc;
}

inline void emit_report(const ReportDocument& doc, const std::string& path) { detail::write_file(path, doc.str()); }

// Pen widths map the weight range linearly onto [0.5, 4.0]; a constant
// weight vector gets the midpoint.
inline std::string format_dot(const WeightedGraph& g, const Eigen::VectorXd& scalings) {
  if (scalings.size() != g.edge_count()) {
    throw InputError("emit_dot: " + std::to_string(scalings.size()) + " scalings for " + std::to_string(g.edge_count()) +
                     " edges");
  }
  const double lo = scalings.size() ? scalings.minCoeff() : 0.0;
  const double hi = scalings.size() ? scalings.maxCoeff() : 0.0;
  const bool flat = hi - lo <= 1e-12 * std::max(1.0, std::abs(hi));
  std::string out = "graph G {\n  node [shape=circle];\n";
  for (Index v = 0; v < g.vertex_count(); ++v) out += "  " + std::to_string(v) + " [label=\"" + std::to_string(v) + "\"];\n";
  char buf[160];
  for (Index k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[static_cast<std::size_t>(k)];
    const double pen = flat ? 2.25 : 0.5 + 3.5 * (scalings(k) - lo) / (hi - lo);
    std::snprintf(buf, sizeof buf, "  %lld -- %lld [weight=%s, penwidth=%.4f];\n", static_cast<long long>(e.u),
                  static_cast<long long>(e.v), format_real(scalings(k)).c_str(), pen);
    out += buf;
  }
  out += "}\n";
  return out;
}

inline void emit_dot(const WeightedGraph& g, const Eigen::VectorXd& scalings, const std::string& path) {
  detail::write_file(path, format_dot(g, scalings));
}

}  // namespace framecond
