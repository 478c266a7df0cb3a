#pragma once

// Min-cost flow with per-node inflow caps, reduced to plain min-cost flow by
// splitting each capped node v into v_in -> v_out.

#include <map>
#include <vector>

#include "flowbp/network.hpp"

namespace flowbp {

struct McfoInstance {
  RawNetwork base;
  // Nodes listed here get split; nullopt is an unbounded cap.
  std::map<NodeId, Capacity> inflow_cap;
};

struct McfoSplit {
  FlowNetwork network;             // split network
  McfoInstance instance;           // what it came from
  std::map<NodeId, NodeId> in_node;  // v -> v_in
  std::map<NodeId, ArcId> bridge;    // v -> bridge arc id
};

// v keeps its id and becomes v_out (demand f_v, all out-arcs); v_in is a new
// node with demand 0 receiving all in-arcs. The bridge v_in -> v_out has
// capacity ~u_v and cost 0.
inline McfoSplit split_node_capacities(const McfoInstance& inst) {
  McfoSplit out;
  out.instance = inst;
  NodeId next_node = 0;
  ArcId next_arc = 0;
  for (const Node& v : inst.base.nodes) next_node = std::max(next_node, v.id);
  for (const Arc& a : inst.base.arcs) next_arc = std::max(next_arc, a.id);
  RawNetwork raw = inst.base;
  for (const auto& [v, cap] : inst.inflow_cap) {
    bool found = false;
    for (const Node& n : inst.base.nodes) found = found || n.id == v;
    if (!found) throw Error(Errc::kUnknownNode, "inflow cap on unknown node " + std::to_string(v));
    const NodeId vin = ++next_node;
    const ArcId bridge = ++next_arc;
    raw.nodes.push_back({vin, 0});
    for (Arc& a : raw.arcs) {
      if (a.head == v) a.head = vin;
    }
    raw.arcs.push_back({bridge, vin, v, cap, linear_cost(0, cap)});
    out.in_node[v] = vin;
    out.bridge[v] = bridge;
  }
  out.network = validate(std::move(raw));
  return out;
}

// Restricts a flow on the split network to the original arcs. Feasibility is
// judged on the original network including the inflow caps.
inline FlowAssignment project(const McfoSplit& split, const FlowAssignment& x) {
  std::map<ArcId, Int> flow;
  for (const Arc& a : split.instance.base.arcs) {
    auto it = x.flow.find(a.id);
    if (it != x.flow.end()) flow[a.id] = it->second;
  }
  const FlowNetwork original = validate(split.instance.base);
  FlowAssignment out = evaluate_flow(original, flow);
  out.maybe_non_unique = x.maybe_non_unique;
  if (out.feasible) {
    for (const auto& [v, cap] : split.instance.inflow_cap) {
      if (!cap) continue;
      Int in = 0;
      for (const Arc& a : split.instance.base.arcs) {
        if (a.head == v) in += flow[a.id];
      }
      if (in > *cap) out.feasible = false;
    }
  }
  return out;
}

}  // namespace flowbp
