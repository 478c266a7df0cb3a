#pragma once

// Ground truth for small instances: an exact successive-shortest-path solver,
// exhaustive enumeration of integral flows, a residual-cycle uniqueness test
// and the depth-N computation tree with a dynamic-programming solver.

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "flowbp/network.hpp"
#include "flowbp/residual.hpp"

namespace flowbp {

namespace detail {

// Min-cost flow on a plain graph with linear costs by successive shortest
// paths (Bellman-Ford), after saturating every negative-cost edge.
class SspSolver {
 public:
  explicit SspSolver(std::size_t nodes) : adj_(nodes), excess_(nodes, 0) {}

  // Returns the edge index.
  std::size_t add_edge(std::size_t from, std::size_t to, Int cap, Int cost) {
    const std::size_t id = edges_.size();
    edges_.push_back({from, to, cap, cost, 0});
    edges_.push_back({to, from, 0, -cost, 0});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    return id;
  }

  void set_supply(std::size_t v, Int s) { excess_[v] = s; }

  Int flow(std::size_t edge) const { return edges_[edge].flow; }

  // False when the supplies cannot be routed.
  bool solve() {
    for (std::size_t i = 0; i < edges_.size(); i += 2) {
      Edge& e = edges_[i];
      if (e.cost < 0 && e.cap > 0) {
        push(i, e.cap);
        excess_[e.from] -= e.cap;
        excess_[e.to] += e.cap;
      }
    }
    const std::size_t n = adj_.size();
    const std::size_t s = n, t = n + 1;
    adj_.resize(n + 2);
    Int need = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (excess_[v] > 0) {
        add_edge(s, v, excess_[v], 0);
        need += excess_[v];
      } else if (excess_[v] < 0) {
        add_edge(v, t, -excess_[v], 0);
      }
    }
    const std::size_t total = n + 2;
    while (need > 0) {
      std::vector<std::optional<Int>> dist(total);
      std::vector<std::size_t> via(total, SIZE_MAX);
      std::vector<bool> queued(total, false);
      std::deque<std::size_t> q{s};
      dist[s] = 0;
      while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop_front();
        queued[u] = false;
        for (std::size_t id : adj_[u]) {
          const Edge& e = edges_[id];
          if (e.cap - e.flow <= 0) continue;
          const Int nd = (CheckedInt(*dist[u]) + e.cost).get();
          if (!dist[e.to] || nd < *dist[e.to]) {
            dist[e.to] = nd;
            via[e.to] = id;
            if (!queued[e.to]) {
              queued[e.to] = true;
              q.push_back(e.to);
            }
          }
        }
      }
      if (!dist[t]) return false;
      Int amount = need;
      for (std::size_t v = t; v != s; v = edges_[via[v]].from) {
        const Edge& e = edges_[via[v]];
        amount = std::min(amount, e.cap - e.flow);
      }
      for (std::size_t v = t; v != s; v = edges_[via[v]].from) push(via[v], amount);
      need -= amount;
    }
    return true;
  }

 private:
  struct Edge {
    std::size_t from, to;
    Int cap, cost, flow;
  };

  void push(std::size_t id, Int amount) {
    edges_[id].flow += amount;
    edges_[id ^ 1].flow -= amount;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<Int> excess_;
};

// True when arcs of unbounded capacity form a cycle whose ray slopes sum to
// a negative number: flow around it lowers the cost without limit.
inline bool has_unbounded_descent(const FlowNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<Int> d(n, 0);
  for (std::size_t round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < net.arc_count(); ++i) {
      const Arc& a = net.arc(i);
      if (a.capacity) continue;
      const Int c = a.cost.right_ray_slope().get();
      if (d[net.tail_index(i)] + c < d[net.head_index(i)]) {
        d[net.head_index(i)] = d[net.tail_index(i)] + c;
        changed = true;
      }
    }
    if (!changed) return false;
  }
  return true;
}

}  // namespace detail

// Exact optimal integral flow, or nullopt when infeasible. Convex piecewise
// costs are split into one parallel edge per piece.
inline std::optional<FlowAssignment> exact_solve(const FlowNetwork& net) {
  if (detail::has_unbounded_descent(net)) {
    // Only meaningful if some feasible flow exists; check with zero costs.
    RawNetwork flat = net.raw();
    for (Arc& a : flat.arcs) a.cost = linear_cost(0, a.capacity);
    if (!exact_solve(validate(std::move(flat)))) return std::nullopt;
    throw Error(Errc::kUnboundedObjective, "a negative-cost cycle has unbounded capacity");
  }
  Int big = 1;
  for (const Node& v : net.nodes()) big += std::max<Int>(v.demand, 0);
  for (const Arc& a : net.arcs()) big += a.capacity.value_or(0);

  detail::SspSolver ssp(net.node_count());
  for (std::size_t v = 0; v < net.node_count(); ++v) ssp.set_supply(v, net.node(v).demand);
  std::vector<std::vector<std::size_t>> pieces(net.arc_count());
  for (std::size_t i = 0; i < net.arc_count(); ++i) {
    const Arc& a = net.arc(i);
    const auto& xs = a.cost.vertices();
    const auto& inner = a.cost.inner_slopes();
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      pieces[i].push_back(ssp.add_edge(net.tail_index(i), net.head_index(i),
                                       (xs[k + 1] - xs[k]).get(), inner[k].get()));
    }
    if (a.cost.right_open()) {
      pieces[i].push_back(ssp.add_edge(net.tail_index(i), net.head_index(i), big,
                                       a.cost.right_ray_slope().get()));
    }
  }
  if (!ssp.solve()) return std::nullopt;
  std::map<ArcId, Int> flow;
  for (std::size_t i = 0; i < net.arc_count(); ++i) {
    Int x = 0;
    for (std::size_t id : pieces[i]) x += ssp.flow(id);
    flow[net.arc(i).id] = x;
  }
  return evaluate_flow(net, flow);
}

inline constexpr double kEnumerationBudget = 1e7;

// Every feasible integral flow, sorted by objective (ties keep enumeration
// order, which is lexicographic in arc index order).
inline std::vector<FlowAssignment> enumerate_integral_flows(const FlowNetwork& net,
                                                            double budget = kEnumerationBudget) {
  double size = 1;
  for (const Arc& a : net.arcs()) {
    if (!a.capacity) throw Error(Errc::kBudgetExceeded, "enumeration needs finite capacities");
    size *= static_cast<double>(*a.capacity + 1);
  }
  if (size > budget) throw Error(Errc::kBudgetExceeded, "search space too large");

  const std::size_t m = net.arc_count();
  const std::size_t n = net.node_count();
  std::vector<std::optional<std::size_t>> last(n);
  for (std::size_t i = 0; i < m; ++i) {
    last[net.tail_index(i)] = i;
    last[net.head_index(i)] = i;
  }
  std::vector<FlowAssignment> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (!last[v] && net.node(v).demand != 0) return out;
  }
  std::vector<Int> x(m, 0);
  std::vector<Int> balance(n, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == m) {
      std::map<ArcId, Int> flow;
      for (std::size_t k = 0; k < m; ++k) flow[net.arc(k).id] = x[k];
      out.push_back(evaluate_flow(net, flow));
      return;
    }
    const std::size_t t = net.tail_index(i), h = net.head_index(i);
    for (Int v = 0; v <= *net.arc(i).capacity; ++v) {
      x[i] = v;
      balance[t] += v;
      balance[h] -= v;
      const bool ok = (last[t] != i || balance[t] == net.node(t).demand) &&
                      (last[h] != i || balance[h] == net.node(h).demand);
      if (ok) rec(i + 1);
      balance[t] -= v;
      balance[h] += v;
    }
  };
  rec(0);
  std::stable_sort(out.begin(), out.end(),
                   [](const FlowAssignment& a, const FlowAssignment& b) { return a.objective < b.objective; });
  return out;
}

// x must be optimal; true when no other optimum exists.
inline bool is_unique_optimum(const FlowNetwork& net, const FlowAssignment& x) {
  const CycleCost c = min_cycle_cost(residual_graph(net, x.flow));
  if (c.kind == CycleCost::Kind::kNegativeCycle) {
    throw Error(Errc::kNotOptimal, "residual graph has a negative cycle");
  }
  return c.kind == CycleCost::Kind::kNoCycle || c.delta > 0;
}

// Depth-N unwrapping of the network around an arc.
struct ComputationTree {
  struct Vertex {
    std::size_t node;                        // original node index
    std::optional<std::size_t> parent_arc;   // tree arc to the parent; none at the root pair
    Int level;
  };
  struct TreeArc {
    std::size_t arc;   // original arc index
    std::size_t tail;  // tree vertex indices, oriented like the original arc
    std::size_t head;
  };

  std::shared_ptr<const FlowNetwork> network;
  std::vector<Vertex> vertices;  // breadth-first order; children after parents
  std::vector<TreeArc> arcs;     // arcs[0] is the root arc
  Int depth = 0;

  bool interior(std::size_t v) const { return vertices[v].level < depth; }
};

inline constexpr std::size_t kTreeBudget = 100000;

inline ComputationTree build_tree(const FlowNetwork& net, ArcId root, Int depth,
                                  std::size_t budget = kTreeBudget) {
  if (depth < 0) throw Error(Errc::kUsage, "tree depth must be >= 0");
  ComputationTree t;
  t.network = std::make_shared<const FlowNetwork>(net);
  t.depth = depth;
  const std::size_t e = net.arc_index(root);
  t.vertices.push_back({net.tail_index(e), 0, 0});
  t.vertices.push_back({net.head_index(e), 0, 0});
  t.arcs.push_back({e, 0, 1});
  for (std::size_t u = 0; u < t.vertices.size(); ++u) {
    const auto vert = t.vertices[u];
    if (vert.level >= depth) continue;
    const std::size_t through = t.arcs[*vert.parent_arc].arc;
    for (const Incidence& inc : net.incident(vert.node)) {
      if (inc.arc == through) continue;
      if (t.vertices.size() >= budget) {
        throw Error(Errc::kSizeBudget, "computation tree exceeds " + std::to_string(budget) + " vertices");
      }
      const std::size_t other = inc.dir == +1 ? net.head_index(inc.arc) : net.tail_index(inc.arc);
      const std::size_t child = t.vertices.size();
      const std::size_t ta = t.arcs.size();
      t.vertices.push_back({other, ta, vert.level + 1});
      t.arcs.push_back({inc.arc, inc.dir == +1 ? u : child, inc.dir == +1 ? child : u});
    }
  }
  return t;
}

struct TreeSolution {
  Int value = 0;
  Int root_flow = 0;
};

// Optimum of the flow problem on the tree, with conservation at interior
// vertices only. With `root_flow` set the root arc is fixed to it; otherwise
// the smallest optimal root flow is reported. nullopt: infeasible.
inline std::optional<TreeSolution> tree_solve(const ComputationTree& t, std::optional<Int> root_flow) {
  const FlowNetwork& net = *t.network;
  using Table = std::vector<std::optional<Int>>;  // index = flow on the arc above

  auto cap_of = [&](std::size_t arc) {
    const auto& c = net.arc(arc).capacity;
    if (!c) throw Error(Errc::kUnsupported, "tree solver needs finite capacities");
    return *c;
  };
  auto cost_at = [&](std::size_t arc, Int x) { return net.arc(arc).cost(CheckedInt(x))->get(); };

  std::vector<std::vector<std::size_t>> children(t.vertices.size());
  for (std::size_t v = 2; v < t.vertices.size(); ++v) {
    const std::size_t pa = *t.vertices[v].parent_arc;
    const std::size_t parent = t.arcs[pa].tail == v ? t.arcs[pa].head : t.arcs[pa].tail;
    children[parent].push_back(v);
  }

  std::vector<Table> below(t.vertices.size());  // subtree cost given flow on the parent arc
  // Min total cost of u's child subtrees as a function of
  // s = sum over children of D(u, child arc) * y, stored at table[s - offset].
  auto children_table = [&](std::size_t u, Int& offset) {
    Table acc{Int{0}};
    offset = 0;
    for (std::size_t c : children[u]) {
      const std::size_t ta = *t.vertices[c].parent_arc;
      const int sign = t.arcs[ta].tail == u ? +1 : -1;
      const Table& g = below[c];
      const Int len = static_cast<Int>(g.size()) - 1;
      const Int new_off = sign == 1 ? offset : offset - len;
      Table next(acc.size() + g.size() - 1);
      for (std::size_t i = 0; i < acc.size(); ++i) {
        if (!acc[i]) continue;
        for (std::size_t y = 0; y < g.size(); ++y) {
          if (!g[y]) continue;
          const Int s = offset + static_cast<Int>(i) + sign * static_cast<Int>(y);
          auto& slot = next[static_cast<std::size_t>(s - new_off)];
          const Int val = *acc[i] + *g[y];
          if (!slot || val < *slot) slot = val;
        }
      }
      acc = std::move(next);
      offset = new_off;
    }
    return acc;
  };
  auto lookup = [](const Table& tab, Int offset, Int s) -> std::optional<Int> {
    const Int i = s - offset;
    if (i < 0 || i >= static_cast<Int>(tab.size())) return std::nullopt;
    return tab[static_cast<std::size_t>(i)];
  };

  for (std::size_t v = t.vertices.size(); v-- > 2;) {
    const std::size_t ta = *t.vertices[v].parent_arc;
    const std::size_t arc = t.arcs[ta].arc;
    const Int u = cap_of(arc);
    Table g(static_cast<std::size_t>(u + 1));
    if (!t.interior(v)) {
      for (Int x = 0; x <= u; ++x) g[static_cast<std::size_t>(x)] = cost_at(arc, x);
    } else {
      Int off = 0;
      const Table kids = children_table(v, off);
      const int dir = t.arcs[ta].tail == v ? +1 : -1;
      const Int demand = net.node(t.vertices[v].node).demand;
      for (Int x = 0; x <= u; ++x) {
        auto rest = lookup(kids, off, demand - dir * x);
        if (rest) g[static_cast<std::size_t>(x)] = cost_at(arc, x) + *rest;
      }
    }
    below[v] = std::move(g);
  }

  const std::size_t root = t.arcs[0].arc;
  const Int u = cap_of(root);
  Int off[2] = {0, 0};
  Table kids[2];
  for (std::size_t r = 0; r < 2; ++r) {
    if (t.interior(r)) kids[r] = children_table(r, off[r]);
  }
  auto side = [&](std::size_t vtx, int dir, Int z) -> std::optional<Int> {
    if (!t.interior(vtx)) return Int{0};
    return lookup(kids[vtx], off[vtx], net.node(t.vertices[vtx].node).demand - dir * z);
  };
  std::optional<TreeSolution> best;
  for (Int z = 0; z <= u; ++z) {
    if (root_flow && z != *root_flow) continue;
    auto a = side(0, +1, z);
    auto b = side(1, -1, z);
    if (!a || !b) continue;
    const Int val = cost_at(root, z) + *a + *b;
    if (!best || val < best->value) best = TreeSolution{val, z};
  }
  return best;
}

}  // namespace flowbp
