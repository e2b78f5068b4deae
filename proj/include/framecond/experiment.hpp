#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "framecond/conditioners.hpp"
#include "framecond/errors.hpp"
#include "framecond/graph.hpp"
#include "framecond/graph_conditioning.hpp"

namespace framecond {

// Per-trial random stream, seeded from (seed, trial) so results do not
// depend on the order in which trials run.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    engine_.seed(seq);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n - 1}, by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

struct GraphGenerator {
  enum class Kind { erdos_renyi, barbell, random_regular };
  Kind kind = Kind::erdos_renyi;
  Index n = 0;     // vertices (erdos_renyi, random_regular)
  double p = 0.0;  // edge probability (erdos_renyi)
  Index k = 0;     // clique size (barbell)
  Index d = 0;     // degree (random_regular)

  static GraphGenerator erdos_renyi(Index n, double p) { return {Kind::erdos_renyi, n, p, 0, 0}; }
  static GraphGenerator barbell(Index k) { return {Kind::barbell, 2 * k, 0.0, k, 0}; }
  static GraphGenerator random_regular(Index n, Index d) { return {Kind::random_regular, n, 0.0, 0, d}; }

  std::string describe() const {
    switch (kind) {
      case Kind::erdos_renyi: {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, p);
        return "erdos_renyi:" + std::to_string(n) + ":" + std::string(buf, res.ptr);
      }
      case Kind::barbell: return "barbell:" + std::to_string(k);
      case Kind::random_regular: return "random_regular:" + std::to_string(n) + ":" + std::to_string(d);
    }
    return "unknown";
  }

  void validate() const {
    switch (kind) {
      case Kind::erdos_renyi:
        if (n < 2) throw InputError("erdos_renyi: need at least 2 vertices");
        if (!(p > 0.0 && p <= 1.0)) throw InputError("erdos_renyi: p must lie in (0, 1]");
        break;
      case Kind::barbell:
        if (k < 2) throw InputError("barbell: clique size must be at least 2");
        break;
      case Kind::random_regular:
        if (n < 3 || d < 1 || d >= n) throw InputError("random_regular: need 1 <= d < n and n >= 3");
        if ((n * d) % 2 != 0) throw InputError("random_regular: n * d must be even");
        break;
    }
  }
};

// Parses "erdos_renyi:N:p", "barbell:k" or "random_regular:N:d".
inline GraphGenerator parse_generator(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = spec.find(':', start);
    parts.push_back(spec.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  auto integer = [&](const std::string& s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("generator: bad integer '" + s + "'");
    return static_cast<Index>(v);
  };
  auto real = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("generator: bad number '" + s + "'");
    return v;
  };
  GraphGenerator g;
  if (parts[0] == "erdos_renyi" && parts.size() == 3) {
    g = GraphGenerator::erdos_renyi(integer(parts[1]), real(parts[2]));
  } else if (parts[0] == "barbell" && parts.size() == 2) {
    g = GraphGenerator::barbell(integer(parts[1]));
  } else if (parts[0] == "random_regular" && parts.size() == 3) {
    g = GraphGenerator::random_regular(integer(parts[1]), integer(parts[2]));
  } else {
    throw InputError("generator: expected erdos_renyi:N:p, barbell:k or random_regular:N:d, got '" + spec + "'");
  }
  g.validate();
  return g;
}

// Two K_k joined by the edge (k - 1, k).
inline WeightedGraph barbell_graph(Index k) {
  std::vector<Edge> edges;
  for (Index off : {Index{0}, k}) {
    for (Index i = 0; i < k; ++i)
      for (Index j = i + 1; j < k; ++j) edges.push_back({off + i, off + j, 1.0});
  }
  edges.push_back({k - 1, k, 1.0});
  return WeightedGraph(2 * k, std::move(edges));
}

inline WeightedGraph complete_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph path_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return WeightedGraph(n, std::move(edges));
}

inline std::optional<WeightedGraph> erdos_renyi_graph(Index n, double p, TrialRng& rng) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j, 1.0});
  return WeightedGraph(n, std::move(edges));
}

// Pairing model; nullopt when the pairing produced a loop or a repeated edge.
inline std::optional<WeightedGraph> random_regular_graph(Index n, Index d, TrialRng& rng) {
  std::vector<Index> points;
  for (Index v = 0; v < n; ++v)
    for (Index j = 0; j < d; ++j) points.push_back(v);
  for (std::size_t i = points.size() - 1; i > 0; --i) std::swap(points[i], points[rng.below(i + 1)]);
  std::vector<Edge> edges;
  std::vector<std::pair<Index, Index>> seen;
  for (std::size_t i = 0; i < points.size(); i += 2) {
    Index a = points[i], b = points[i + 1];
    if (a == b) return std::nullopt;
    if (a > b) std::swap(a, b);
    if (std::find(seen.begin(), seen.end(), std::make_pair(a, b)) != seen.end()) return std::nullopt;
    seen.emplace_back(a, b);
    edges.push_back({a, b, 1.0});
  }
  return WeightedGraph(n, std::move(edges));
}

struct TrialResult {
  int trial = 0;
  int attempts = 0;
  Index vertices = 0;
  Index edges = 0;
  double kappa_before = 0.0;
  double kappa_after = 0.0;
  double average_before = 0.0;
  double average_after = 0.0;
  bool decreased = false;
  SolverStatus status = SolverStatus::optimal;
};

struct ExperimentReport {
  GraphGenerator generator;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<TrialResult> rows;
  int solved = 0;                     // trials with optimal status
  double decrease_fraction = 0.0;     // among solved trials
  double mean_relative_change = 0.0;  // (after - before) / before, among solved trials
  double min_relative_change = 0.0;
  double max_relative_change = 0.0;
};

inline constexpr int kMaxGeneratorAttempts = 1000;

// Connected graph for one trial, with the number of draws it took.
inline std::pair<WeightedGraph, int> generate_connected(const GraphGenerator& gen, TrialRng& rng) {
  gen.validate();
  if (gen.kind == GraphGenerator::Kind::barbell) return {barbell_graph(gen.k), 1};
  for (int attempt = 1; attempt <= kMaxGeneratorAttempts; ++attempt) {
    std::optional<WeightedGraph> g = gen.kind == GraphGenerator::Kind::erdos_renyi
                                         ? erdos_renyi_graph(gen.n, gen.p, rng)
                                         : random_regular_graph(gen.n, gen.d, rng);
    if (g && g->is_connected()) return {std::move(*g), attempt};
  }
  throw InputError("generator " + gen.describe() + " produced no connected graph in " +
                   std::to_string(kMaxGeneratorAttempts) + " attempts");
}

inline TrialResult run_trial(const GraphGenerator& gen, int trial, std::uint64_t seed, const SolverOptions& opts) {
  TrialRng rng(seed, static_cast<std::uint64_t>(trial));
  auto [g, attempts] = generate_connected(gen, rng);
  TrialResult r;
  r.trial = trial;
  r.attempts = attempts;
  r.vertices = g.vertex_count();
  r.edges = g.edge_count();
  const GraphConditionReport rep = graph_condition(g, opts);
  r.status = rep.status;
  r.kappa_before = rep.before.condition_number;
  r.kappa_after = rep.after.condition_number;
  r.average_before = resistance_summary(g).average;
  if (rep.status == SolverStatus::optimal) {
    r.average_after = resistance_summary(conditioned_graph(g, rep.trace_matched_scalings)).average;
    r.decreased = r.average_after < r.average_before;
  } else {
    r.average_after = r.average_before;
  }
  return r;
}

// Empirical check of whether condition-number-optimal reweighting (trace
// matched) lowers the average effective resistance.
inline ExperimentReport conjecture_experiment(const GraphGenerator& gen, int trials, std::uint64_t seed,
                                              const SolverOptions& opts = {}) {
  if (trials < 1) throw InputError("conjecture_experiment: trials must be at least 1");
  gen.validate();
  ExperimentReport out;
  out.generator = gen;
  out.trials = trials;
  out.seed = seed;
  int decreased = 0;
  double sum = 0.0;
  out.min_relative_change = kInfinity;
  out.max_relative_change = -kInfinity;
  for (int t = 0; t < trials; ++t) {
    TrialResult r = run_trial(gen, t, seed, opts);
    if (r.status == SolverStatus::optimal) {
      ++out.solved;
      decreased += r.decreased ? 1 : 0;
      const double change = (r.average_after - r.average_before) / r.average_before;
      sum += change;
      out.min_relative_change = std::min(out.min_relative_change, change);
      out.max_relative_change = std::max(out.max_relative_change, change);
    }
    out.rows.push_back(r);
  }
  if (out.solved > 0) {
    out.decrease_fraction = static_cast<double>(decreased) / out.solved;
    out.mean_relative_change = sum / out.solved;
  } else {
    out.min_relative_change = out.max_relative_change = 0.0;
  }
  return out;
}

}  // namespace framecond
