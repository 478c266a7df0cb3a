#pragma once

// (1 + eps)-approximate min-cost flow for nonnegative linear costs.
//
// Costs are rescaled by t = c_max eps / (4 m n) and perturbed:
//   cbar_e = 4m floor(c_e / t) + p_e,  p_e uniform in {1, ..., 4m}.
// With probability at least 1/2 the perturbed instance has a unique optimum,
// which BP finds and certifies after 2 cbar_max n^2 rounds; otherwise the
// costs are redrawn. The scheme then fixes the most expensive arc at the
// value BP chose, shrinks the instance and repeats.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowbp/bp.hpp"
#include "flowbp/network.hpp"
#include "flowbp/oracles.hpp"
#include "flowbp/random.hpp"

namespace flowbp {

struct Epsilon {
  Int num = 1;
  Int den = 2;

  // "p/q" or a decimal such as "0.1"; must lie strictly between 0 and 1.
  static Epsilon parse(const std::string& text) {
    Epsilon e;
    auto fail = [&] { return Error(Errc::kUsage, "epsilon must be a rational in (0, 1), got '" + text + "'"); };
    auto digits = [](const std::string& s) {
      return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
    };
    const auto slash = text.find('/');
    const auto dot = text.find('.');
    try {
      if (slash != std::string::npos) {
        const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
        if (!digits(a) || !digits(b)) throw fail();
        e = {std::stoll(a), std::stoll(b)};
      } else if (dot != std::string::npos) {
        const std::string a = text.substr(0, dot), b = text.substr(dot + 1);
        if ((!a.empty() && !digits(a)) || !digits(b) || b.size() > 17) throw fail();
        Int den = 1;
        for (std::size_t i = 0; i < b.size(); ++i) den *= 10;
        e = {(a.empty() ? 0 : std::stoll(a)) * den + std::stoll(b), den};
      } else {
        if (!digits(text)) throw fail();
        e = {std::stoll(text), 1};
      }
    } catch (const std::out_of_range&) {
      throw fail();
    }
    if (e.den <= 0 || e.num <= 0 || e.num >= e.den) throw fail();
    return e;
  }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

struct PerturbedInstance {
  FlowNetwork network;   // same arcs and demands, costs cbar
  BigInt t_num, t_den;   // t = c_max eps / (4 m n)
  std::vector<Int> cbar;  // by arc index
  std::vector<Int> noise;  // p_e
  Int cbar_max = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

inline void require_nonnegative_linear(const FlowNetwork& net) {
  for (const Arc& a : net.arcs()) {
    if (!is_linear(a.cost) || *a.cost(CheckedInt(0)) != CheckedInt(0)) {
      throw Error(Errc::kUnsupported, "approximation needs linear arc costs");
    }
    if (linear_slope(a.cost) < 0) throw Error(Errc::kUnsupported, "approximation needs costs >= 0");
  }
}

inline PerturbedInstance perturb_costs(const FlowNetwork& net, const Epsilon& eps, std::uint64_t seed,
                                       std::uint64_t stream = 0) {
  require_nonnegative_linear(net);
  if (net.c_max() == 0) throw Error(Errc::kZeroCostInstance, "all costs are zero");
  const BigInt m = static_cast<Int>(net.arc_count());
  const BigInt n = static_cast<Int>(net.node_count());
  PerturbedInstance out;
  out.seed = seed;
  out.stream = stream;
  out.t_num = BigInt(net.c_max()) * eps.num;
  out.t_den = 4 * m * n * eps.den;
  Rng rng(seed, stream);
  RawNetwork raw = net.raw();
  for (std::size_t i = 0; i < raw.arcs.size(); ++i) {
    Arc& a = raw.arcs[i];
    const BigInt c = linear_slope(a.cost);
    const BigInt q = (c * out.t_den) / out.t_num;  // floor(c / t), c >= 0
    const Int p = rng.between(1, to_int64(4 * m));
    const Int cbar = to_int64(4 * m * q + p);
    out.noise.push_back(p);
    out.cbar.push_back(cbar);
    out.cbar_max = std::max(out.cbar_max, cbar);
    a.cost = linear_cost(cbar, a.capacity);
  }
  out.network = validate(std::move(raw));
  return out;
}

struct AprxmtOptions {
  Int restart_budget = 64;
  unsigned threads = 1;
  std::uint64_t round = 0;  // decimation round; selects the sub-streams
};

struct AprxmtResult {
  FlowAssignment assignment;  // on the network passed in, original costs
  Int restarts = 0;           // redraws after the first
  Int cbar_max = 0;
  Int rounds = 0;             // BP rounds of the accepted attempt
};

// Unique optimum of a randomly perturbed copy of `net`.
inline AprxmtResult aprxmt(const FlowNetwork& net, const Epsilon& eps, std::uint64_t seed,
                           const AprxmtOptions& opt = {}) {
  require_nonnegative_linear(net);
  const Preprocessed pre = preprocess_degree(net);
  AprxmtResult out;
  if (pre.network.arc_count() == 0) {
    out.assignment = detail::merge_fixed(net, pre.fixed, FlowAssignment{});
    return out;
  }
  if (pre.network.c_max() == 0) {
    auto x = exact_solve(pre.network);
    if (!x) throw Error(Errc::kInfeasible, "instance is infeasible");
    out.assignment = detail::merge_fixed(net, pre.fixed, *x);
    return out;
  }
  const Int n = static_cast<Int>(pre.network.node_count());
  for (Int r = 0; r < opt.restart_budget; ++r) {
    const std::uint64_t stream = (opt.round << 32) | static_cast<std::uint64_t>(r);
    const PerturbedInstance p = perturb_costs(pre.network, eps, seed, stream);
    const Int rounds = (CheckedInt(2) * p.cbar_max * n * n).get();
    const Int threshold = (CheckedInt(n) * p.cbar_max).get();
    const Preprocessed same{p.network, {}};
    const UniquenessResult u = with_exact_arithmetic([&]<class I>() {
      return detail::detect_with<I>(p.network, same, rounds, threshold, opt.threads, true);
    });
    if (u.unique) {
      std::map<ArcId, Int> flow = pre.fixed;
      for (const auto& [id, x] : u.assignment.flow) flow[id] = x;
      out.assignment = evaluate_flow(net, flow);
      out.restarts = r;
      out.cbar_max = p.cbar_max;
      out.rounds = rounds;
      return out;
    }
  }
  throw Error(Errc::kRestartBudgetExceeded,
              "no uniquely solvable perturbation in " + std::to_string(opt.restart_budget) + " draws");
}

// Removes arc e' carrying `value` and re-applies degree-1 preprocessing.
inline Preprocessed fix_arc(const FlowNetwork& net, ArcId arc, Int value) {
  const Arc& a = net.arc(net.arc_index(arc));
  if (value < 0 || (a.capacity && value > *a.capacity)) {
    throw Error(Errc::kValueOutOfRange, "flow " + std::to_string(value) + " outside [0, u] on arc " +
                                            std::to_string(arc));
  }
  return preprocess_degree(validate(remove_arc_with_flow(net.raw(), arc, value)));
}

struct DecimationStep {
  ArcId fixed_arc = 0;
  Int value = 0;
  Int restarts = 0;
  Int cbar_max = 0;
  Int rounds = 0;
};

struct ApproxOptions {
  Int restart_budget = 64;
  unsigned threads = 1;
  // Called before each fix with the current instance, BP's flow on it, the
  // arc about to be fixed and the scale t = num/den of this round.
  std::function<void(const FlowNetwork&, const FlowAssignment&, ArcId, const BigInt&, const BigInt&)>
      on_round{};
};

struct ApproxResult {
  FlowAssignment assignment;
  std::vector<DecimationStep> steps;
};

inline ApproxResult approx_scheme(const FlowNetwork& net, const Epsilon& eps, std::uint64_t seed,
                                  const ApproxOptions& opt = {}) {
  require_nonnegative_linear(net);
  Preprocessed pre = preprocess_degree(net);
  std::map<ArcId, Int> flow = pre.fixed;
  FlowNetwork cur = pre.network;
  ApproxResult out;
  for (std::uint64_t round = 0; cur.arc_count() > 0; ++round) {
    if (cur.c_max() == 0) {
      auto x = exact_solve(cur);
      if (!x) throw Error(Errc::kInfeasible, "instance is infeasible");
      for (const auto& [id, v] : x->flow) flow[id] = v;
      break;
    }
    const AprxmtResult r = aprxmt(cur, eps, seed, {opt.restart_budget, opt.threads, round});
    ArcId pick = cur.arc(0).id;
    Int best = -1;
    for (const Arc& a : cur.arcs()) {
      const Int c = linear_slope(a.cost);
      if (c > best || (c == best && a.id < pick)) {
        best = c;
        pick = a.id;
      }
    }
    const Int value = r.assignment.flow.at(pick);
    if (opt.on_round) {
      const BigInt m = static_cast<Int>(cur.arc_count());
      const BigInt n = static_cast<Int>(cur.node_count());
      opt.on_round(cur, r.assignment, pick, BigInt(cur.c_max()) * eps.num, 4 * m * n * eps.den);
    }
    flow[pick] = value;
    Preprocessed next;
    try {
      next = fix_arc(cur, pick, value);
    } catch (const Error& e) {
      if (e.code() != Errc::kForcedInfeasible) throw;
      throw Error(Errc::kInfeasibleAfterFix, e.what());
    }
    for (const auto& [id, v] : next.fixed) flow[id] = v;
    cur = std::move(next.network);
    out.steps.push_back({pick, value, r.restarts, r.cbar_max, r.rounds});
  }
  out.assignment = evaluate_flow(net, flow);
  if (!out.assignment.feasible) throw Error(Errc::kInfeasibleAfterFix, "assembled flow is infeasible");
  return out;
}

}  // namespace flowbp
