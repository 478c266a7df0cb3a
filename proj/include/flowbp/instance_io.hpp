#pragma once

// Instance files.
//
// DIMACS "min" format:
//   c comment
//   p min <nodes> <arcs>
//   n <id> <supply>
//   a <tail> <head> <low> <cap> <cost>
// Nodes are numbered 1..nodes, arcs get ids 1..arcs in file order, and the
// lower bound must be 0.
//
// JSON format:
//   {"schema": "flowbp-instance/1",
//    "nodes": [{"id": 1, "demand": 1, "inflow_cap": 3}, ...],
//    "arcs":  [{"id": 1, "tail": 1, "head": 2, "capacity": 2 | "inf",
//               "cost": 5 | {"breakpoints": [...], "slopes": [...], "anchor": [x, y]}}]}
// A node with "inflow_cap" (an integer or "inf") bounds its total inflow.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "flowbp/mcfo.hpp"
#include "flowbp/network.hpp"
#include "flowbp/pwl_json.hpp"

namespace flowbp {

inline constexpr const char* kInstanceSchema = "flowbp-instance/1";

namespace detail {

inline Int parse_int(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::kSyntaxError, "line " + std::to_string(line) + ": bad integer '" + tok + "'");
  }
}

}  // namespace detail

inline RawNetwork parse_dimacs_raw(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::optional<std::pair<Int, Int>> header;
  std::map<NodeId, Int> supply;
  std::vector<Arc> arcs;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind) || kind == "c") continue;
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    auto bad = [&](const std::string& why) {
      return Error(Errc::kSyntaxError, "line " + std::to_string(lineno) + ": " + why);
    };
    if (kind == "p") {
      if (header) throw bad("second problem line");
      if (tok.size() != 3 || tok[0] != "min") throw bad("expected 'p min <nodes> <arcs>'");
      header = {detail::parse_int(tok[1], lineno), detail::parse_int(tok[2], lineno)};
      if (header->first < 0 || header->second < 0) throw bad("negative size");
    } else if (kind == "n") {
      if (!header) throw bad("node line before problem line");
      if (tok.size() != 2) throw bad("expected 'n <id> <supply>'");
      const Int id = detail::parse_int(tok[0], lineno);
      if (id < 1 || id > header->first) {
        throw Error(Errc::kInconsistent, "line " + std::to_string(lineno) + ": node id out of range");
      }
      if (supply.count(id)) throw Error(Errc::kDuplicateId, "node " + tok[0] + " listed twice");
      supply[id] = detail::parse_int(tok[1], lineno);
    } else if (kind == "a") {
      if (!header) throw bad("arc line before problem line");
      if (tok.size() != 5) throw bad("expected 'a <tail> <head> <low> <cap> <cost>'");
      const Int tail = detail::parse_int(tok[0], lineno);
      const Int head = detail::parse_int(tok[1], lineno);
      const Int low = detail::parse_int(tok[2], lineno);
      const Int cap = detail::parse_int(tok[3], lineno);
      const Int cost = detail::parse_int(tok[4], lineno);
      if (low != 0) {
        throw Error(Errc::kNonZeroLowerBound,
                    "line " + std::to_string(lineno) + ": lower bound " + tok[2] + " is not 0");
      }
      for (Int v : {tail, head}) {
        if (v < 1 || v > header->first) {
          throw Error(Errc::kInconsistent,
                      "line " + std::to_string(lineno) + ": node id out of range");
        }
      }
      if (cap < 0) throw Error(Errc::kNegativeCapacity, "line " + std::to_string(lineno));
      arcs.push_back({static_cast<ArcId>(arcs.size() + 1), tail, head, cap, linear_cost(cost, cap)});
    } else {
      throw bad("unknown line type '" + kind + "'");
    }
  }
  if (!header) throw Error(Errc::kSyntaxError, "missing problem line");
  if (static_cast<Int>(arcs.size()) != header->second) {
    throw Error(Errc::kInconsistent, "header declares " + std::to_string(header->second) +
                                         " arcs, file has " + std::to_string(arcs.size()));
  }
  RawNetwork raw;
  for (Int id = 1; id <= header->first; ++id) {
    raw.nodes.push_back({id, supply.count(id) ? supply[id] : 0});
  }
  raw.arcs = std::move(arcs);
  return raw;
}

inline FlowNetwork parse_dimacs(const std::string& text) { return validate(parse_dimacs_raw(text)); }

// Requires nodes 1..n and arcs 1..m in order, finite capacities and linear
// costs that vanish at 0.
inline std::string emit_dimacs(const FlowNetwork& net) {
  std::ostringstream out;
  out << "p min " << net.node_count() << ' ' << net.arc_count() << '\n';
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const Node& v = net.node(i);
    if (v.id != static_cast<NodeId>(i + 1)) {
      throw Error(Errc::kUnsupported, "DIMACS output needs node ids 1..n in order");
    }
    if (v.demand != 0) out << "n " << v.id << ' ' << v.demand << '\n';
  }
  for (std::size_t i = 0; i < net.arc_count(); ++i) {
    const Arc& a = net.arc(i);
    if (a.id != static_cast<ArcId>(i + 1)) {
      throw Error(Errc::kUnsupported, "DIMACS output needs arc ids 1..m in order");
    }
    if (!a.capacity) throw Error(Errc::kUnsupported, "DIMACS has no unbounded capacity");
    if (!is_linear(a.cost) || *a.cost(CheckedInt(0)) != CheckedInt(0)) {
      throw Error(Errc::kUnsupported, "DIMACS only carries linear costs");
    }
    out << "a " << a.tail << ' ' << a.head << " 0 " << *a.capacity << ' ' << linear_slope(a.cost)
        << '\n';
  }
  return out.str();
}

inline McfoInstance parse_json_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kSyntaxError, e.what());
  }
  McfoInstance inst;
  try {
    if (j.contains("schema") && j.at("schema") != kInstanceSchema) {
      throw Error(Errc::kSyntaxError, "unsupported schema " + j.at("schema").dump());
    }
    for (const auto& n : j.at("nodes")) {
      const NodeId id = n.at("id").get<Int>();
      inst.base.nodes.push_back({id, n.value("demand", Int{0})});
      if (n.contains("inflow_cap")) {
        const auto& c = n.at("inflow_cap");
        inst.inflow_cap[id] = c == "inf" ? kUnbounded : Capacity(c.get<Int>());
      }
    }
    for (const auto& a : j.at("arcs")) {
      Arc arc;
      arc.id = a.at("id").get<Int>();
      arc.tail = a.at("tail").get<Int>();
      arc.head = a.at("head").get<Int>();
      const auto& c = a.at("capacity");
      arc.capacity = c == "inf" ? kUnbounded : Capacity(c.get<Int>());
      if (arc.capacity && *arc.capacity < 0) {
        throw Error(Errc::kNegativeCapacity, "arc " + std::to_string(arc.id));
      }
      const auto& cost = a.at("cost");
      arc.cost = cost.is_object() ? pwl_from_json<CheckedInt>(cost)
                                  : linear_cost(cost.get<Int>(), arc.capacity);
      inst.base.arcs.push_back(std::move(arc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kSyntaxError, e.what());
  }
  return inst;
}

inline nlohmann::json instance_to_json(const FlowNetwork& net) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& v : net.nodes()) nodes.push_back({{"id", v.id}, {"demand", v.demand}});
  nlohmann::json arcs = nlohmann::json::array();
  for (const Arc& a : net.arcs()) {
    nlohmann::json cost;
    if (is_linear(a.cost) && *a.cost(CheckedInt(0)) == CheckedInt(0)) {
      cost = linear_slope(a.cost);
    } else {
      cost = to_json(a.cost);
    }
    arcs.push_back({{"id", a.id},
                    {"tail", a.tail},
                    {"head", a.head},
                    {"capacity", a.capacity ? nlohmann::json(*a.capacity) : nlohmann::json("inf")},
                    {"cost", cost}});
  }
  return {{"schema", kInstanceSchema}, {"nodes", nodes}, {"arcs", arcs}};
}

// What the solvers consume, plus the node split when inflow caps were given.
struct Instance {
  FlowNetwork network;
  std::optional<McfoSplit> split;

  // Flow on the instance as written in the file.
  FlowAssignment to_original(const FlowAssignment& x) const { return split ? project(*split, x) : x; }
  FlowNetwork original() const { return split ? validate(split->instance.base) : network; }
};

enum class Format { kAuto, kDimacs, kJson };

inline Instance load_instance_text(const std::string& text, Format fmt) {
  if (fmt == Format::kAuto) {
    const auto first = text.find_first_not_of(" \t\r\n");
    fmt = first != std::string::npos && text[first] == '{' ? Format::kJson : Format::kDimacs;
  }
  if (fmt == Format::kDimacs) return {parse_dimacs(text), std::nullopt};
  McfoInstance inst = parse_json_instance(text);
  if (inst.inflow_cap.empty()) return {validate(std::move(inst.base)), std::nullopt};
  McfoSplit split = split_node_capacities(inst);
  FlowNetwork net = split.network;
  return {std::move(net), std::move(split)};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kUsage, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Instance load_instance(const std::string& path, Format fmt = Format::kAuto) {
  return load_instance_text(read_file(path), fmt);
}

}  // namespace flowbp
