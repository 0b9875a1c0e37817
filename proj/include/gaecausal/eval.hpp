#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaecausal/acyclicity.hpp"
#include "gaecausal/error.hpp"

namespace gaecausal {

class BinaryGraph {
 public:
  BinaryGraph() = default;
  explicit BinaryGraph(std::size_t d) : d_(d), edges_(d * d, false) {}

  // Every nonzero entry becomes an edge.
  static BinaryGraph support_of(const Matrix& a) {
    require(a.is_square(), "BinaryGraph: adjacency must be square");
    BinaryGraph g(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) g.set(i, j, a(i, j) != 0.0);
    return g;
  }

  std::size_t d() const noexcept { return d_; }
  bool has(std::size_t i, std::size_t j) const noexcept { return edges_[i * d_ + j]; }
  void set(std::size_t i, std::size_t j, bool on = true) { edges_[i * d_ + j] = on; }

  std::size_t edge_count() const noexcept {
    std::size_t c = 0;
    for (bool e : edges_) c += e ? 1 : 0;
    return c;
  }

  Matrix to_matrix() const {
    Matrix m(d_, d_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) m(i, j) = has(i, j) ? 1.0 : 0.0;
    return m;
  }

  friend bool operator==(const BinaryGraph&, const BinaryGraph&) = default;

 private:
  std::size_t d_ = 0;
  std::vector<bool> edges_;
};

namespace detail {

// Iterative DFS; returns the node sequence of one directed cycle, or nullopt.
inline std::optional<std::vector<std::size_t>> find_cycle(const BinaryGraph& g) {
  const std::size_t d = g.d();
  enum Color : unsigned char { kWhite, kGray, kBlack };
  std::vector<Color> color(d, kWhite);
  std::vector<std::size_t> parent(d, d);
  for (std::size_t root = 0; root < d; ++root) {
    if (color[root] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = kGray;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next == d) {
        color[node] = kBlack;
        stack.pop_back();
        continue;
      }
      const std::size_t child = next++;
      if (!g.has(node, child)) continue;
      if (color[child] == kGray) {
        std::vector<std::size_t> cycle{child};
        for (std::size_t v = node; v != child; v = parent[v]) cycle.push_back(v);
        return std::vector<std::size_t>(cycle.rbegin(), cycle.rend());
      }
      if (color[child] == kWhite) {
        color[child] = kGray;
        parent[child] = node;
        stack.emplace_back(child, 0);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// True iff the graph has no directed cycle (self-loops count as cycles).
inline bool is_dag(const BinaryGraph& g) { return !detail::find_cycle(g).has_value(); }

struct ThresholdResult {
  BinaryGraph graph;
  std::size_t repairs = 0;
};

// Keeps i -> j iff |A[i][j]| > tau and i != j, then removes the weakest edge of
// some remaining cycle until the graph is acyclic.
inline ThresholdResult threshold(const WeightedAdjacency& a, double tau) {
  require(tau >= 0.0, "threshold: tau must be non-negative");
  const std::size_t d = a.d();
  ThresholdResult r{BinaryGraph(d), 0};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j && std::abs(a(i, j)) > tau) r.graph.set(i, j);

  while (auto cycle = detail::find_cycle(r.graph)) {
    const auto& nodes = *cycle;
    std::size_t from = nodes.back(), to = nodes.front();
    double weakest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::size_t u = nodes[k];
      const std::size_t v = nodes[(k + 1) % nodes.size()];
      const double w = std::abs(a(u, v));
      if (w < weakest) {
        weakest = w;
        from = u;
        to = v;
      }
    }
    r.graph.set(from, to, false);
    ++r.repairs;
  }
  return r;
}

struct GraphMetrics {
  std::size_t shd = 0;
  double tpr = 0.0;
  std::size_t extra = 0;
  std::size_t missing = 0;
  std::size_t reversed = 0;
  std::size_t true_positives = 0;
  double wall_time_seconds = 0.0;
};

// Structural Hamming distance. A reversed edge costs 1; an edge predicted in
// both directions where truth has one counts as one reversal-free match plus
// one extra.
inline GraphMetrics shd(const BinaryGraph& pred, const BinaryGraph& truth) {
  require(pred.d() == truth.d(), "shd: graphs have different node counts");
  const std::size_t d = pred.d();
  GraphMetrics m;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        if (pred.has(i, i) && !truth.has(i, i)) ++m.extra;
        if (truth.has(i, i) && !pred.has(i, i)) ++m.missing;
        continue;
      }
      const bool p = pred.has(i, j);
      const bool t = truth.has(i, j);
      if (p && t) ++m.true_positives;
      if (p && !t) {
        if (truth.has(j, i) && !pred.has(j, i))
          ++m.reversed;
        else
          ++m.extra;
      }
      if (t && !p && !pred.has(j, i)) ++m.missing;
    }
  }
  m.shd = m.extra + m.missing + m.reversed;
  const std::size_t true_edges = truth.edge_count();
  m.tpr = true_edges == 0 ? 0.0
                          : static_cast<double>(m.true_positives) / static_cast<double>(true_edges);
  return m;
}

// Correctly oriented predicted edges over true edges.
inline double tpr(const BinaryGraph& pred, const BinaryGraph& truth) {
  require(pred.d() == truth.d(), "tpr: graphs have different node counts");
  const std::size_t true_edges = truth.edge_count();
  if (true_edges == 0) throw PreconditionError("tpr: truth has no edges, rate is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.d(); ++i)
    for (std::size_t j = 0; j < truth.d(); ++j)
      if (truth.has(i, j) && pred.has(i, j)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(true_edges);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline MeanStd mean_std(std::span<const double> values) {
  require(!values.empty(), "mean_std: need at least one value");
  MeanStd r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

struct MetricsSummary {
  std::size_t runs = 0;
  MeanStd shd;
  MeanStd tpr;
  MeanStd wall_time_seconds;
};

inline MetricsSummary aggregate(std::span<const GraphMetrics> runs) {
  require(!runs.empty(), "aggregate: need at least one run");
  std::vector<double> s, t, w;
  for (const GraphMetrics& m : runs) {
    s.push_back(static_cast<double>(m.shd));
    t.push_back(m.tpr);
    w.push_back(m.wall_time_seconds);
  }
  return MetricsSummary{runs.size(), mean_std(s), mean_std(t), mean_std(w)};
}

}  // namespace gaecausal
