#pragma once

// Round-synchronous min-sum belief propagation for min-cost flow.
//
// Every arc e = (v, w) keeps two messages, m_{e->v} and m_{e->w}, each a
// convex function of the flow on e. The message toward v summarizes the
// best cost on w's side of e:
//
//   m_{e->v}(z) = phi_e(z) + min { sum m_{e'->w}(x_e') : D(w,e) z + sum D(w,e') x_e' = f_w }
//
// where e' ranges over the other arcs at w. The belief of e is
// m_{e->v} + m_{e->w} - phi_e and the estimate is its smallest minimizer.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <boost/container/small_vector.hpp>
#include <nlohmann/json.hpp>

#include "flowbp/network.hpp"
#include "flowbp/parallel.hpp"
#include "flowbp/pwl.hpp"
#include "flowbp/pwl_json.hpp"
#include "flowbp/residual.hpp"

namespace flowbp {

template <class I>
struct MessageState {
  Int round = 0;
  std::vector<PwlConvex<I>> to_tail;  // m_{e->tail(e)}, by arc index
  std::vector<PwlConvex<I>> to_head;  // m_{e->head(e)}

  friend bool operator==(const MessageState&, const MessageState&) = default;
};

struct PieceStats {
  std::size_t total = 0;  // pieces over all messages
  std::size_t max = 0;    // largest single message
};

template <class I>
PieceStats piece_stats(const MessageState<I>& s) {
  PieceStats out;
  for (const auto* table : {&s.to_tail, &s.to_head}) {
    for (const auto& m : *table) {
      out.total += m.piece_count();
      out.max = std::max(out.max, m.piece_count());
    }
  }
  return out;
}

template <class I>
nlohmann::json to_json(const MessageState<I>& s, const FlowNetwork& net) {
  nlohmann::json arcs = nlohmann::json::array();
  for (std::size_t e = 0; e < s.to_tail.size(); ++e) {
    arcs.push_back({{"arc", net.arc(e).id},
                    {"to_tail", to_json(s.to_tail[e])},
                    {"to_head", to_json(s.to_head[e])}});
  }
  return {{"round", s.round}, {"messages", arcs}};
}

template <class I>
class BpEngine {
 public:
  using Fn = PwlConvex<I>;

  // With `normalize`, every new message is shifted to value 0 at its first
  // vertex. Beliefs then change by a constant only, which keeps minimizers
  // and gaps but not the tree-optimum values.
  explicit BpEngine(FlowNetwork net, unsigned threads = 1, bool normalize = false)
      : net_(std::move(net)), normalize_(normalize) {
    for (std::size_t v = 0; v < net_.node_count(); ++v) {
      if (net_.incident(v).size() < 2) {
        throw Error(Errc::kUsage, "node " + std::to_string(net_.node(v).id) +
                                      " has degree < 2; preprocess the network first");
      }
    }
    const std::size_t m = net_.arc_count();
    phi_.reserve(m);
    for (const Arc& a : net_.arcs()) phi_.push_back(pwl_cast<I>(a.cost));
    sources_.resize(2 * m);
    for (std::size_t e = 0; e < m; ++e) {
      gather(e, net_.head_index(e), sources_[2 * e]);
      gather(e, net_.tail_index(e), sources_[2 * e + 1]);
    }
    if (threads > 1) pool_ = std::make_unique<WorkerPool>(threads);
  }

  const FlowNetwork& network() const { return net_; }
  const Fn& phi(std::size_t e) const { return phi_[e]; }

  MessageState<I> init() const {
    const std::size_t m = net_.arc_count();
    return {0, std::vector<Fn>(m, Fn::zero()), std::vector<Fn>(m, Fn::zero())};
  }

  MessageState<I> update(const MessageState<I>& prev) const {
    const std::size_t m = net_.arc_count();
    MessageState<I> next{prev.round + 1, std::vector<Fn>(m, Fn::zero()),
                         std::vector<Fn>(m, Fn::zero())};
    auto body = [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) {
        next.to_tail[e] = message(prev, e, true);
        next.to_head[e] = message(prev, e, false);
      }
    };
    if (pool_) {
      pool_->parallel_for(m, body);
    } else {
      body(0, m);
    }
    return next;
  }

  Fn belief(const MessageState<I>& s, std::size_t e) const {
    return difference(add(s.to_tail[e], s.to_head[e]), phi_[e]);
  }

  // Per-arc smallest belief minimizers, keyed by arc id. Objective and
  // feasibility refer to this (reduced) network only.
  FlowAssignment estimate(const MessageState<I>& s) const {
    std::map<ArcId, Int> flow;
    bool flat = false;
    for (std::size_t e = 0; e < net_.arc_count(); ++e) {
      const Fn b = belief(s, e);
      const I z = argmin(b);
      auto right = b(z + I(1));
      if (right && *right == *b(z)) flat = true;
      flow[net_.arc(e).id] = to_int64(to_big(z));
    }
    FlowAssignment out = evaluate_flow(net_, flow);
    out.maybe_non_unique = flat;
    return out;
  }

 private:
  struct Source {
    std::uint32_t arc;
    bool tail_table;  // the message sits in to_tail
    int sign;         // D(node, arc)
  };
  using Sources = boost::container::small_vector<Source, 4>;

  // Messages flowing into `node` from every arc there except e.
  void gather(std::size_t e, std::size_t node, Sources& out) const {
    for (const Incidence& inc : net_.incident(node)) {
      if (inc.arc == e) continue;
      out.push_back({static_cast<std::uint32_t>(inc.arc), inc.dir == +1, inc.dir});
    }
  }

  // New message from e toward its tail (factor at the head) or toward its
  // head (factor at the tail).
  Fn message(const MessageState<I>& prev, std::size_t e, bool toward_tail) const {
    const Sources& src = sources_[2 * e + (toward_tail ? 0 : 1)];
    auto incoming = [&](const Source& s) -> const Fn& {
      return s.tail_table ? prev.to_tail[s.arc] : prev.to_head[s.arc];
    };
    Fn interp = Fn::zero();
    if (src.size() == 1) {
      interp = src[0].sign == 1 ? incoming(src[0]) : compose_affine(incoming(src[0]), -1, I(0));
    } else {
      boost::container::small_vector<Fn, 4> fs;
      for (const Source& s : src) {
        fs.push_back(s.sign == 1 ? incoming(s) : compose_affine(incoming(s), -1, I(0)));
      }
      interp = detail::reduce_pairwise<I>(fs);
    }
    // Head factor: -z + sum = f_w, so the others carry f_w + z.
    // Tail factor: z + sum = f_v, so the others carry f_v - z.
    const I demand(net_.node(toward_tail ? net_.head_index(e) : net_.tail_index(e)).demand);
    Fn out = add(phi_[e], compose_affine(interp, toward_tail ? 1 : -1, demand));
    if (normalize_) out = add_constant(out, I(0) - out.anchor().second);
    return out;
  }

  FlowNetwork net_;
  std::vector<Fn> phi_;
  std::vector<Sources> sources_;
  std::unique_ptr<WorkerPool> pool_;
  bool normalize_ = false;
};

template <class I>
MessageState<I> init_messages(const FlowNetwork& net) {
  return BpEngine<I>(net).init();
}

template <class I>
MessageState<I> update_round(const FlowNetwork& net, const MessageState<I>& s) {
  return BpEngine<I>(net).update(s);
}

template <class I>
PwlConvex<I> belief(const FlowNetwork& net, const MessageState<I>& s, ArcId e) {
  return BpEngine<I>(net).belief(s, net.arc_index(e));
}

template <class I>
FlowAssignment estimate(const FlowNetwork& net, const MessageState<I>& s) {
  return BpEngine<I>(net).estimate(s);
}

// Runs `fn.template operator()<I>()` with overflow-checked 64-bit integers
// and repeats it with arbitrary precision if any value overflows.
template <class Fn>
auto with_exact_arithmetic(Fn&& fn) {
  try {
    return fn.template operator()<CheckedInt>();
  } catch (const Error& e) {
    if (e.code() != Errc::kOverflow) throw;
  }
  return fn.template operator()<BigInt>();
}

struct RunOptions {
  std::optional<Int> rounds{};  // nullopt: convergence bound of the reduced network
  Int patience = 0;           // stop once the estimate is unchanged this many rounds; 0 = never
  unsigned threads = 1;
  bool record_pieces = false;
  // Called after every round with the round number and a JSON dump of the
  // message table (only built when set).
  std::function<void(const nlohmann::json&)> dump{};
};

struct RunResult {
  FlowAssignment assignment;  // on the network passed to run(), fixed flows included
  Int rounds_used = 0;
  Int rounds_planned = 0;
  std::vector<PieceStats> pieces;  // per round when recorded
  bool big_integers = false;       // 64-bit arithmetic overflowed
};

namespace detail {

inline FlowAssignment merge_fixed(const FlowNetwork& original, const std::map<ArcId, Int>& fixed,
                                  const FlowAssignment& reduced) {
  std::map<ArcId, Int> flow = fixed;
  for (const auto& [id, x] : reduced.flow) flow[id] = x;
  FlowAssignment out = evaluate_flow(original, flow);
  out.maybe_non_unique = reduced.maybe_non_unique;
  return out;
}

template <class I>
RunResult run_with(const FlowNetwork& net, const Preprocessed& pre, const RunOptions& opt,
                   const std::function<void(const BpEngine<I>&, const MessageState<I>&)>& observe) {
  RunResult out;
  out.big_integers = std::is_same_v<I, BigInt>;
  out.rounds_planned = opt.rounds ? *opt.rounds : iteration_bound(pre.network, BoundMode::kConvergence);
  if (pre.network.arc_count() == 0) {
    out.assignment = merge_fixed(net, pre.fixed, FlowAssignment{});
    return out;
  }
  BpEngine<I> engine(pre.network, opt.threads);
  MessageState<I> state = engine.init();
  std::optional<std::map<ArcId, Int>> last;
  Int stable = 0;
  FlowAssignment est;
  for (Int t = 1; t <= out.rounds_planned; ++t) {
    state = engine.update(state);
    out.rounds_used = t;
    if (opt.record_pieces) out.pieces.push_back(piece_stats(state));
    if (opt.dump) opt.dump(to_json(state, pre.network));
    if (observe) observe(engine, state);
    if (opt.patience > 0) {
      est = engine.estimate(state);
      stable = last && *last == est.flow ? stable + 1 : 0;
      last = est.flow;
      if (stable >= opt.patience) break;
    }
  }
  if (out.rounds_used == 0) {
    // Zero rounds: every belief is still flat; report the all-zero estimate.
    std::map<ArcId, Int> zero;
    for (const Arc& a : pre.network.arcs()) zero[a.id] = 0;
    est = evaluate_flow(pre.network, zero);
    est.maybe_non_unique = true;
  } else if (opt.patience == 0 || stable < opt.patience) {
    est = engine.estimate(state);
  }
  out.assignment = merge_fixed(net, pre.fixed, est);
  return out;
}

}  // namespace detail

// Preprocesses `net`, runs BP on the reduced network and merges the fixed
// flows back. `opt.rounds` counts rounds on the reduced network.
inline RunResult run(const FlowNetwork& net, const RunOptions& opt = {}) {
  const Preprocessed pre = preprocess_degree(net);
  return with_exact_arithmetic([&]<class I>() {
    return detail::run_with<I>(net, pre, opt, {});
  });
}

struct UniquenessResult {
  bool unique = false;
  FlowAssignment assignment;  // the BP estimate; the exact optimum when unique
  Int rounds = 0;
  std::vector<ArcId> failing_arcs;  // arcs whose belief has no clear gap
};

namespace detail {

// Every arc's belief must rise by more than n c_max on both sides of its
// minimizer; a neighbour outside the domain counts as +inf.
template <class I>
std::vector<ArcId> gap_failures(const BpEngine<I>& engine, const MessageState<I>& s, const I& threshold) {
  std::vector<ArcId> failing;
  const FlowNetwork& net = engine.network();
  for (std::size_t e = 0; e < net.arc_count(); ++e) {
    const PwlConvex<I> b = engine.belief(s, e);
    const I z = argmin(b);
    const I bound = *b(z) + threshold;
    bool ok = true;
    for (const I& nb : {z - I(1), z + I(1)}) {
      auto v = b(nb);
      if (v && !(bound < *v)) ok = false;
    }
    if (!ok) failing.push_back(net.arc(e).id);
  }
  return failing;
}

template <class I>
UniquenessResult detect_with(const FlowNetwork& net, const Preprocessed& pre, Int rounds, Int threshold,
                             unsigned threads, bool normalize = false) {
  UniquenessResult out;
  out.rounds = rounds;
  if (pre.network.arc_count() == 0) {
    out.unique = true;
    out.assignment = merge_fixed(net, pre.fixed, FlowAssignment{});
    return out;
  }
  BpEngine<I> engine(pre.network, threads, normalize);
  MessageState<I> state = engine.init();
  for (Int t = 0; t < rounds; ++t) state = engine.update(state);
  if (rounds == 0) {
    out.unique = false;
    return out;
  }
  out.failing_arcs = gap_failures(engine, state, I(threshold));
  out.unique = out.failing_arcs.empty();
  out.assignment = merge_fixed(net, pre.fixed, engine.estimate(state));
  return out;
}

}  // namespace detail

// Decides whether the instance has a unique optimum by running
// n^2 c_max + n rounds on the reduced network and testing belief gaps.
inline UniquenessResult detect_uniqueness(const FlowNetwork& net, unsigned threads = 1) {
  const Preprocessed pre = preprocess_degree(net);
  const Int rounds = iteration_bound(pre.network, BoundMode::kUniqueness);
  const Int threshold = (CheckedInt(static_cast<Int>(pre.network.node_count())) * pre.network.c_max()).get();
  return with_exact_arithmetic([&]<class I>() {
    return detail::detect_with<I>(net, pre, rounds, threshold, threads);
  });
}

}  // namespace flowbp
