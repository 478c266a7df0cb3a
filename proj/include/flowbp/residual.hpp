#pragma once

#include <optional>
#include <vector>

#include "flowbp/network.hpp"

namespace flowbp {

struct ResidualArc {
  ArcId origin = 0;
  bool forward = true;
  std::size_t tail = 0;  // node indices of the network
  std::size_t head = 0;
  Int cost = 0;
};

struct ResidualGraph {
  std::size_t node_count = 0;
  std::vector<ResidualArc> arcs;
};

// Forward arcs where x_e < u_e cost the right derivative of c_e at x_e;
// backward arcs where x_e > 0 cost minus the left derivative.
inline ResidualGraph residual_graph(const FlowNetwork& net, const std::map<ArcId, Int>& x) {
  if (!evaluate_flow(net, x).feasible) throw Error(Errc::kInfeasibleFlow, "flow is not feasible");
  ResidualGraph g;
  g.node_count = net.node_count();
  for (std::size_t i = 0; i < net.arc_count(); ++i) {
    const Arc& a = net.arc(i);
    const CheckedInt xe = x.at(a.id);
    if (!a.capacity || xe.get() < *a.capacity) {
      g.arcs.push_back({a.id, true, net.tail_index(i), net.head_index(i),
                        a.cost.right_derivative(xe)->get()});
    }
    if (xe.get() > 0) {
      g.arcs.push_back({a.id, false, net.head_index(i), net.tail_index(i),
                        -a.cost.left_derivative(xe)->get()});
    }
  }
  return g;
}

struct CycleCost {
  enum class Kind { kNoCycle, kNegativeCycle, kFinite };
  Kind kind = Kind::kNoCycle;
  Int delta = 0;  // meaningful for kFinite

  friend bool operator==(const CycleCost&, const CycleCost&) = default;
};

// Minimum cost of a directed cycle. Going forward and straight back along
// the same arc is not a cycle.
inline CycleCost min_cycle_cost(const ResidualGraph& g) {
  using D = std::optional<CheckedInt>;
  const std::size_t n = g.node_count;
  std::vector<D> dist(n * n);
  for (std::size_t v = 0; v < n; ++v) dist[v * n + v] = CheckedInt(0);
  for (const auto& a : g.arcs) {
    D& d = dist[a.tail * n + a.head];
    if (!d || CheckedInt(a.cost) < *d) d = CheckedInt(a.cost);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!dist[i * n + k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!dist[k * n + j]) continue;
        const CheckedInt via = *dist[i * n + k] + *dist[k * n + j];
        D& d = dist[i * n + j];
        if (!d || via < *d) d = via;
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (*dist[v * n + v] < CheckedInt(0)) return {CycleCost::Kind::kNegativeCycle, 0};
  }

  // Shortest w -> u path avoiding the twin of each residual arc u -> w.
  std::optional<CheckedInt> best;
  std::vector<D> d(n);
  for (std::size_t skip = 0; skip < g.arcs.size(); ++skip) {
    const ResidualArc& a = g.arcs[skip];
    std::fill(d.begin(), d.end(), D{});
    d[a.head] = CheckedInt(0);
    for (std::size_t round = 0; round + 1 < n; ++round) {
      bool changed = false;
      for (const auto& b : g.arcs) {
        if (b.origin == a.origin && b.forward != a.forward) continue;
        if (!d[b.tail]) continue;
        const CheckedInt via = *d[b.tail] + b.cost;
        if (!d[b.head] || via < *d[b.head]) {
          d[b.head] = via;
          changed = true;
        }
      }
      if (!changed) break;
    }
    if (d[a.tail] && a.tail != a.head) {
      const CheckedInt c = *d[a.tail] + a.cost;
      if (!best || c < *best) best = c;
    }
  }
  if (!best) return {CycleCost::Kind::kNoCycle, 0};
  return {CycleCost::Kind::kFinite, best->get()};
}

enum class BoundMode { kConvergence, kUniqueness };

// Rounds after which the estimate is exact (convergence: path-length bound
// (n-1) c_max with cycle gap 1) or the uniqueness test is decisive.
inline Int iteration_bound(const FlowNetwork& net, BoundMode mode) {
  const CheckedInt n = static_cast<Int>(net.node_count());
  const CheckedInt c = net.c_max();
  if (mode == BoundMode::kUniqueness) return (n * n * c + n).get();
  if (n.get() == 0) return 0;
  return ((((n - 1) * c) / 2 + 1) * n).get();
}

}  // namespace flowbp
