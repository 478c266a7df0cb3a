#pragma once

// Random feasible instances: a random connected digraph whose demands come
// from a randomly drawn integral flow.

#include <algorithm>
#include <vector>

#include "flowbp/network.hpp"
#include "flowbp/oracles.hpp"
#include "flowbp/random.hpp"

namespace flowbp {

enum class Uniqueness { kAny, kUnique, kNonUnique };

struct GenOptions {
  Int nodes = 4;
  Int arcs = 6;
  Int cmax = 8;        // linear costs uniform in [cmin, cmax]
  Int cmin = 1;
  Int capmax = 4;      // capacities uniform in [1, capmax]
  Int cost_pieces = 1;  // > 1: convex costs with up to this many pieces, slopes in [-cmax, cmax]
  Uniqueness uniqueness = Uniqueness::kAny;
  std::uint64_t seed = 1;
  Int attempts = 10000;
};

namespace detail {

inline Cost random_convex_cost(Rng& rng, Int cap, Int pieces, Int cmax) {
  pieces = std::max<Int>(1, std::min(pieces, cap));
  std::vector<Int> inner;
  for (Int x = 1; x < cap; ++x) inner.push_back(x);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    std::swap(inner[i], inner[i + rng.below(inner.size() - i)]);
  }
  inner.resize(static_cast<std::size_t>(pieces - 1));
  std::sort(inner.begin(), inner.end());
  std::vector<Int> slopes;
  while (static_cast<Int>(slopes.size()) < pieces) {
    const Int s = rng.between(-cmax, cmax);
    if (std::find(slopes.begin(), slopes.end(), s) == slopes.end()) slopes.push_back(s);
  }
  std::sort(slopes.begin(), slopes.end());
  std::vector<ExtendedInt<CheckedInt>> bps{ExtendedInt<CheckedInt>(CheckedInt(0))};
  for (Int x : inner) bps.emplace_back(CheckedInt(x));
  bps.emplace_back(CheckedInt(cap));
  std::vector<CheckedInt> cs(slopes.begin(), slopes.end());
  return Cost::construct(bps, cs, CheckedInt(0), CheckedInt(0));
}

inline FlowNetwork generate_once(const GenOptions& o, Rng& rng) {
  RawNetwork raw;
  for (Int v = 1; v <= o.nodes; ++v) raw.nodes.push_back({v, 0});
  auto add = [&](Int a, Int b) {
    if (rng.chance(1, 2)) std::swap(a, b);
    const Int cap = rng.between(1, o.capmax);
    const Cost cost = o.cost_pieces > 1 ? random_convex_cost(rng, cap, rng.between(2, o.cost_pieces), o.cmax)
                                        : linear_cost(rng.between(o.cmin, o.cmax), cap);
    raw.arcs.push_back({static_cast<ArcId>(raw.arcs.size() + 1), a, b, cap, cost});
  };
  for (Int v = 2; v <= o.nodes; ++v) add(v, rng.between(1, v - 1));
  while (static_cast<Int>(raw.arcs.size()) < o.arcs) {
    const Int a = rng.between(1, o.nodes);
    Int b = rng.between(1, o.nodes - 1);
    if (b >= a) ++b;
    add(a, b);
  }
  for (const Arc& a : raw.arcs) {
    const Int x = rng.between(0, *a.capacity);
    raw.nodes[static_cast<std::size_t>(a.tail - 1)].demand += x;
    raw.nodes[static_cast<std::size_t>(a.head - 1)].demand -= x;
  }
  return validate(std::move(raw));
}

}  // namespace detail

inline FlowNetwork generate(const GenOptions& o) {
  if (o.nodes < 2 || o.arcs < o.nodes - 1) {
    throw Error(Errc::kUsage, "need at least 2 nodes and arcs >= nodes - 1 for connectivity");
  }
  if (o.capmax < 1 || o.cmax < 0 || o.cmin > o.cmax) throw Error(Errc::kUsage, "bad cost or capacity range");
  Rng rng(o.seed, 0x67656e);
  for (Int attempt = 0; attempt < o.attempts; ++attempt) {
    FlowNetwork net = detail::generate_once(o, rng);
    if (o.uniqueness == Uniqueness::kAny) return net;
    const auto opt = exact_solve(net);
    if (!opt) continue;
    const bool unique = is_unique_optimum(net, *opt);
    if (unique == (o.uniqueness == Uniqueness::kUnique)) return net;
  }
  throw Error(Errc::kGenerationBudget, "no instance with the requested uniqueness after " +
                                           std::to_string(o.attempts) + " attempts");
}

}  // namespace flowbp
