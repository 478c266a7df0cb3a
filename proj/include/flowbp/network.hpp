#pragma once

// Capacitated min-cost flow instances.
//
// Conservation at node v reads sum_e D(v,e) x_e = f_v with D(v,e) = +1 when
// v is the tail of e and -1 when it is the head, so a positive demand f_v is
// a net supply. Every arc carries a convex cost on [0, u_e].

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowbp/error.hpp"
#include "flowbp/integer.hpp"
#include "flowbp/pwl.hpp"

namespace flowbp {

using NodeId = Int;
using ArcId = Int;
using Cost = PwlConvex<CheckedInt>;

// Arc capacity; nullopt is an unbounded arc.
using Capacity = std::optional<Int>;
inline constexpr Capacity kUnbounded = std::nullopt;

inline Cost linear_cost(Int slope, Capacity cap) {
  if (cap) return Cost::segment(CheckedInt(0), CheckedInt(*cap), CheckedInt(slope), CheckedInt(0));
  return Cost::segment(CheckedInt(0), std::nullopt, CheckedInt(slope), CheckedInt(0));
}

struct Node {
  NodeId id = 0;
  Int demand = 0;
};

struct Arc {
  ArcId id = 0;
  NodeId tail = 0;
  NodeId head = 0;
  Capacity capacity;
  Cost cost = Cost::zero();
};

struct RawNetwork {
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
};

struct Incidence {
  std::size_t arc;  // index into arcs()
  int dir;          // D(v, e)
};

// Largest absolute slope of a cost function.
inline Int slope_bound(const Cost& c) {
  Int best = 0;
  for (const auto& s : c.slopes()) best = std::max(best, std::abs(s.get()));
  return best;
}

inline bool is_linear(const Cost& c) { return c.piece_count() <= 1; }

// Slope of a single-piece cost (0 for a point).
inline Int linear_slope(const Cost& c) {
  auto s = c.slopes();
  return s.empty() ? 0 : s.front().get();
}

// Validated, immutable network with dense indices.
class FlowNetwork {
 public:
  FlowNetwork() = default;

  std::size_t node_count() const { return raw_.nodes.size(); }
  std::size_t arc_count() const { return raw_.arcs.size(); }
  const std::vector<Node>& nodes() const { return raw_.nodes; }
  const std::vector<Arc>& arcs() const { return raw_.arcs; }
  const Node& node(std::size_t i) const { return raw_.nodes[i]; }
  const Arc& arc(std::size_t i) const { return raw_.arcs[i]; }
  const std::vector<Incidence>& incident(std::size_t node) const { return incidence_[node]; }
  std::size_t tail_index(std::size_t arc) const { return ends_[arc].first; }
  std::size_t head_index(std::size_t arc) const { return ends_[arc].second; }
  std::size_t node_index(NodeId id) const { return lookup(node_index_, id, "node"); }
  std::size_t arc_index(ArcId id) const { return lookup(arc_index_, id, "arc"); }
  bool has_arc(ArcId id) const { return arc_index_.count(id) != 0; }
  bool has_node(NodeId id) const { return node_index_.count(id) != 0; }
  Int c_max() const { return c_max_; }
  const RawNetwork& raw() const { return raw_; }
  bool all_linear() const {
    return std::all_of(raw_.arcs.begin(), raw_.arcs.end(),
                       [](const Arc& a) { return is_linear(a.cost); });
  }
  bool all_finite() const {
    return std::all_of(raw_.arcs.begin(), raw_.arcs.end(),
                       [](const Arc& a) { return a.capacity.has_value(); });
  }

  friend FlowNetwork validate(RawNetwork raw);

 private:
  static std::size_t lookup(const std::unordered_map<Int, std::size_t>& m, Int id,
                            const char* what) {
    auto it = m.find(id);
    if (it == m.end()) {
      throw Error(Errc::kUnknownNode, std::string("unknown ") + what + " id " + std::to_string(id));
    }
    return it->second;
  }

  RawNetwork raw_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<std::pair<std::size_t, std::size_t>> ends_;
  std::unordered_map<Int, std::size_t> node_index_;
  std::unordered_map<Int, std::size_t> arc_index_;
  Int c_max_ = 0;
};

inline FlowNetwork validate(RawNetwork raw) {
  FlowNetwork net;
  CheckedInt total = 0;
  for (std::size_t i = 0; i < raw.nodes.size(); ++i) {
    const Node& v = raw.nodes[i];
    if (!net.node_index_.emplace(v.id, i).second) {
      throw Error(Errc::kDuplicateId, "duplicate node id " + std::to_string(v.id));
    }
    total += v.demand;
  }
  if (total != CheckedInt(0)) {
    throw Error(Errc::kDemandImbalance, "demands sum to " + to_string(total) + ", not 0");
  }
  net.incidence_.resize(raw.nodes.size());
  for (std::size_t i = 0; i < raw.arcs.size(); ++i) {
    const Arc& a = raw.arcs[i];
    if (!net.arc_index_.emplace(a.id, i).second) {
      throw Error(Errc::kDuplicateId, "duplicate arc id " + std::to_string(a.id));
    }
    if (a.tail == a.head) throw Error(Errc::kSelfLoop, "arc " + std::to_string(a.id) + " is a loop");
    if (a.capacity && *a.capacity < 0) {
      throw Error(Errc::kNegativeCapacity, "arc " + std::to_string(a.id) + " has negative capacity");
    }
    const auto lo = a.cost.lower();
    const auto hi = a.cost.upper();
    const bool domain_ok = lo == ExtendedInt<CheckedInt>(CheckedInt(0)) &&
                           (a.capacity ? hi == ExtendedInt<CheckedInt>(CheckedInt(*a.capacity))
                                       : hi.is_pos_inf());
    if (!domain_ok) {
      throw Error(Errc::kBadCostDomain,
                  "cost of arc " + std::to_string(a.id) + " must be defined exactly on [0, u]");
    }
    const std::size_t t = FlowNetwork::lookup(net.node_index_, a.tail, "node");
    const std::size_t h = FlowNetwork::lookup(net.node_index_, a.head, "node");
    net.ends_.emplace_back(t, h);
    net.incidence_[t].push_back({i, +1});
    net.incidence_[h].push_back({i, -1});
    net.c_max_ = std::max(net.c_max_, slope_bound(a.cost));
  }
  net.raw_ = std::move(raw);
  return net;
}

struct FlowAssignment {
  std::map<ArcId, Int> flow;
  Int objective = 0;
  bool feasible = false;
  bool maybe_non_unique = false;

  friend bool operator==(const FlowAssignment&, const FlowAssignment&) = default;
};

// Objective and feasibility of an integral flow given on every arc.
// Arcs missing from `flow` or with flow outside [0, u] make it infeasible.
inline FlowAssignment evaluate_flow(const FlowNetwork& net, const std::map<ArcId, Int>& flow) {
  FlowAssignment out;
  out.flow = flow;
  out.feasible = true;
  CheckedInt objective = 0;
  std::vector<CheckedInt> balance(net.node_count(), CheckedInt(0));
  for (std::size_t i = 0; i < net.arc_count(); ++i) {
    const Arc& a = net.arc(i);
    auto it = flow.find(a.id);
    if (it == flow.end()) {
      out.feasible = false;
      continue;
    }
    auto c = a.cost(CheckedInt(it->second));
    if (!c) {
      out.feasible = false;
      continue;
    }
    objective += *c;
    balance[net.tail_index(i)] += it->second;
    balance[net.head_index(i)] -= it->second;
  }
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    if (balance[v] != CheckedInt(net.node(v).demand)) out.feasible = false;
  }
  out.objective = objective.get();
  return out;
}

// Removes arc `arc_id` carrying `value` units and moves that flow into the
// endpoint demands.
inline RawNetwork remove_arc_with_flow(const RawNetwork& raw, ArcId arc_id, Int value) {
  RawNetwork out;
  const Arc* gone = nullptr;
  for (const Arc& a : raw.arcs) {
    if (a.id == arc_id) {
      gone = &a;
    } else {
      out.arcs.push_back(a);
    }
  }
  if (!gone) throw Error(Errc::kUnknownNode, "unknown arc id " + std::to_string(arc_id));
  out.nodes = raw.nodes;
  for (Node& v : out.nodes) {
    if (v.id == gone->tail) v.demand = (CheckedInt(v.demand) - value).get();
    if (v.id == gone->head) v.demand = (CheckedInt(v.demand) + value).get();
  }
  return out;
}

struct Preprocessed {
  FlowNetwork network;
  std::map<ArcId, Int> fixed;
};

// Fixes the flow on arcs incident to degree-1 nodes and drops isolated nodes
// until every remaining node has degree >= 2.
inline Preprocessed preprocess_degree(const FlowNetwork& net) {
  RawNetwork raw = net.raw();
  std::map<ArcId, Int> fixed;
  for (;;) {
    std::unordered_map<NodeId, std::vector<std::size_t>> touching;
    for (const Node& v : raw.nodes) touching[v.id];
    for (std::size_t i = 0; i < raw.arcs.size(); ++i) {
      touching[raw.arcs[i].tail].push_back(i);
      touching[raw.arcs[i].head].push_back(i);
    }
    bool changed = false;
    for (const Node& v : raw.nodes) {
      const auto& inc = touching[v.id];
      if (inc.size() >= 2) continue;
      if (inc.empty()) {
        if (v.demand != 0) {
          throw Error(Errc::kForcedInfeasible,
                      "node " + std::to_string(v.id) + " is isolated with demand " +
                          std::to_string(v.demand));
        }
        const NodeId id = v.id;
        std::erase_if(raw.nodes, [id](const Node& w) { return w.id == id; });
      } else {
        const Arc a = raw.arcs[inc[0]];
        const Int x = a.tail == v.id ? v.demand : -v.demand;
        if (x < 0 || (a.capacity && x > *a.capacity)) {
          throw Error(Errc::kForcedInfeasible, "arc " + std::to_string(a.id) + " is forced to carry " +
                                                   std::to_string(x) + " units");
        }
        fixed[a.id] = x;
        const NodeId id = v.id;
        raw = remove_arc_with_flow(raw, a.id, x);
        std::erase_if(raw.nodes, [id](const Node& w) { return w.id == id; });
      }
      changed = true;
      break;
    }
    if (!changed) break;
  }
  return {validate(std::move(raw)), std::move(fixed)};
}

// Objective of the fixed part of a preprocessing result.
inline Int fixed_cost(const FlowNetwork& original, const std::map<ArcId, Int>& fixed) {
  CheckedInt total = 0;
  for (const auto& [id, x] : fixed) total += *original.arc(original.arc_index(id)).cost(CheckedInt(x));
  return total.get();
}

}  // namespace flowbp
