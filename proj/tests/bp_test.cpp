#include <gtest/gtest.h>

#include "flowbp/flowbp.hpp"
#include "test_support.hpp"

namespace flowbp {
namespace {

using testing::arc;
using testing::at;
using testing::C;
using testing::F;
using testing::flows;
using testing::random_network;

F on_0_2(long slope) { return F::segment(C(0), C(2), C(slope), C(0)); }

TEST(Init, T1) {
  const auto s = init_messages<C>(instances::t1());
  EXPECT_EQ(s.round, 0);
  ASSERT_EQ(s.to_tail.size(), 3u);
  ASSERT_EQ(s.to_head.size(), 3u);
  for (const auto* table : {&s.to_tail, &s.to_head}) {
    for (const F& m : *table) EXPECT_EQ(m, F::zero());
  }
}

TEST(Init, ParallelArcsGetTheirOwnEntries) {
  const FlowNetwork net = validate({{{1, 1}, {2, -1}}, {arc(1, 1, 2, 1, 1), arc(2, 1, 2, 1, 2)}});
  const auto s = init_messages<C>(net);
  EXPECT_EQ(s.to_tail.size() + s.to_head.size(), 4u);
}

TEST(Engine, RequiresDegreeTwo) {
  const FlowNetwork net = validate({{{1, 1}, {2, -1}}, {arc(1, 1, 2, 1, 1)}});
  EXPECT_THROW(BpEngine<C>{net}, Error);
}

TEST(Update, T1HandRounds) {
  const FlowNetwork net = instances::t1();
  const BpEngine<C> engine(net);
  const auto s1 = engine.update(engine.init());
  EXPECT_EQ(s1.round, 1);
  EXPECT_EQ(s1.to_tail[0], on_0_2(1));
  EXPECT_EQ(s1.to_head[1], on_0_2(1));
  const auto s2 = engine.update(s1);
  EXPECT_EQ(s2.to_tail[0], on_0_2(2));
}

TEST(Update, UsesOnlyThePreviousTable) {
  const FlowNetwork net = random_network(5, 5, 8, 2);
  const auto pre = preprocess_degree(net);
  ASSERT_GT(pre.network.arc_count(), 0u);
  const BpEngine<C> engine(pre.network);
  auto s = engine.init();
  for (int t = 0; t < 3; ++t) s = engine.update(s);
  const auto a = engine.update(s);
  const auto b = engine.update(s);
  EXPECT_EQ(a, b);
}

TEST(Belief, T1RoundOne) {
  const FlowNetwork net = instances::t1();
  const auto s1 = update_round(net, init_messages<C>(net));
  EXPECT_EQ(belief(net, s1, 1), on_0_2(1));
}

TEST(Belief, EqualsCostWhenBothMessagesAreTheCost) {
  const FlowNetwork net = instances::t1();
  MessageState<C> s = init_messages<C>(net);
  for (std::size_t e = 0; e < 3; ++e) s.to_tail[e] = s.to_head[e] = net.arc(e).cost;
  for (ArcId e = 1; e <= 3; ++e) EXPECT_EQ(belief(net, s, e), net.arc(net.arc_index(e)).cost);
}

TEST(Belief, T1RoundThirtyDirectArc) {
  const FlowNetwork net = instances::t1();
  const BpEngine<C> engine(net);
  auto s = engine.init();
  for (int t = 0; t < 30; ++t) s = engine.update(s);
  EXPECT_EQ(argmin(engine.belief(s, 2)).get(), 0);
}

TEST(Estimate, T1AtTheBound) {
  const FlowNetwork net = instances::t1();
  const BpEngine<C> engine(net);
  auto s = engine.init();
  for (int t = 1; t <= 20; ++t) {
    s = engine.update(s);
    if (t < 12) continue;
    const FlowAssignment x = engine.estimate(s);
    EXPECT_EQ(x.flow, flows({{1, 1}, {2, 1}, {3, 0}})) << "round " << t;
    EXPECT_EQ(x.objective, 2);
    EXPECT_TRUE(x.feasible);
    EXPECT_FALSE(x.maybe_non_unique);
  }
}

TEST(Estimate, FlatBeliefTakesSmallestMinimizer) {
  // Both routes of the tied triangle cost 2; at round 2 the beliefs are flat.
  const RunResult r = run(instances::t1(2), {.rounds = 2});
  EXPECT_TRUE(r.assignment.maybe_non_unique);
  EXPECT_EQ(r.assignment.flow, flows({{1, 0}, {2, 0}, {3, 0}}));
  EXPECT_FALSE(r.assignment.feasible);
}

TEST(Estimate, EarlyRoundMayBeInfeasible) {
  const RunResult r = run(instances::t1(), {.rounds = 1});
  EXPECT_EQ(r.rounds_used, 1);
  EXPECT_FALSE(r.assignment.feasible);
}

TEST(Run, T1Auto) {
  const RunResult r = run(instances::t1());
  EXPECT_EQ(r.rounds_planned, 12);
  EXPECT_EQ(r.rounds_used, 12);
  EXPECT_EQ(r.assignment.flow, flows({{1, 1}, {2, 1}, {3, 0}}));
  EXPECT_FALSE(r.big_integers);
}

TEST(Run, MergesFixedFlows) {
  const FlowNetwork net = validate({{{1, 1}, {2, 0}, {3, 0}, {4, 0}, {5, -1}},
                                    {arc(1, 1, 2, 2, 1), arc(2, 2, 3, 2, 1), arc(3, 1, 3, 2, 3),
                                     arc(4, 3, 4, 2, 1), arc(5, 4, 5, 2, 1)}});
  const RunResult r = run(net);
  EXPECT_EQ(r.assignment.flow, flows({{1, 1}, {2, 1}, {3, 0}, {4, 1}, {5, 1}}));
  EXPECT_EQ(r.assignment.objective, 4);
  EXPECT_TRUE(r.assignment.feasible);
}

TEST(Run, EmptyAfterPreprocessing) {
  const RunResult r = run(validate({{{1, 1}, {2, -1}}, {arc(1, 1, 2, 2, 5)}}));
  EXPECT_EQ(r.rounds_used, 0);
  EXPECT_EQ(r.assignment.flow, flows({{1, 1}}));
  EXPECT_EQ(r.assignment.objective, 5);
}

TEST(Run, PatienceStopsEarly) {
  const RunResult r = run(instances::fig6(24), {.patience = 3});
  EXPECT_LT(r.rounds_used, r.rounds_planned);
  EXPECT_GE(r.rounds_used, 4);
}

TEST(Run, DumpSeesEveryRound) {
  std::vector<nlohmann::json> seen;
  run(instances::t1(), {.rounds = 3, .dump = [&](const nlohmann::json& j) { seen.push_back(j); }});
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[2]["round"], 3);
  EXPECT_EQ(seen[0]["messages"].size(), 3u);
  EXPECT_EQ(seen[0]["messages"][0]["to_tail"]["slopes"], nlohmann::json::array({1}));
}

TEST(Run, FallsBackToBigIntegers) {
  // c_max = 3 * 2^58 fits in 64 bits; the messages soon do not.
  const Int big = Int{1} << 58;
  RawNetwork raw = instances::t1_raw();
  for (Arc& a : raw.arcs) a.cost = linear_cost(linear_slope(a.cost) * big, a.capacity);
  const RunResult r = run(validate(raw), {.rounds = 40});
  EXPECT_TRUE(r.big_integers);
  EXPECT_EQ(r.assignment.flow, flows({{1, 1}, {2, 1}, {3, 0}}));
  EXPECT_EQ(r.assignment.objective, 2 * big);
}

TEST(Run, ConvergesOnUniqueInstances) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const FlowNetwork net = random_network(seed, 5, 8, 3, 6, Uniqueness::kUnique);
    const RunResult r = run(net);
    EXPECT_EQ(r.assignment.flow, exact_solve(net)->flow) << "seed " << seed;
  }
}

TEST(Run, TriangleOscillatesBeforeSettling) {
  const Int d = 24;
  const BpEngine<C> engine(instances::fig6(d));
  auto s = engine.init();
  std::vector<Int> seq;
  for (Int t = 1; t <= 8 * d; ++t) {
    s = engine.update(s);
    seq.push_back(engine.estimate(s).flow.at(1));
  }
  int changes = 0;
  for (std::size_t i = 1; i < seq.size(); ++i) changes += seq[i] != seq[i - 1];
  EXPECT_GE(changes, 2);
  EXPECT_EQ(seq.back(), 0);
  EXPECT_EQ(run(instances::fig6(d)).assignment.flow, exact_solve(instances::fig6(d))->flow);
}

TEST(Detect, T1) {
  const UniquenessResult u = detect_uniqueness(instances::t1());
  EXPECT_TRUE(u.unique);
  EXPECT_EQ(u.rounds, 30);
  EXPECT_EQ(u.assignment.flow, flows({{1, 1}, {2, 1}, {3, 0}}));
}

TEST(Detect, TiedT1) {
  const UniquenessResult u = detect_uniqueness(instances::t1(2));
  EXPECT_FALSE(u.unique);
  EXPECT_FALSE(u.failing_arcs.empty());
}

TEST(Detect, ScaledT1) {
  const Int d = 5;
  RawNetwork raw = instances::t1_raw(2 * d - 1);
  raw.arcs[0].cost = linear_cost(d, raw.arcs[0].capacity);
  raw.arcs[1].cost = linear_cost(d, raw.arcs[1].capacity);
  const UniquenessResult u = detect_uniqueness(validate(raw));
  // The two-arc route costs 2d, one more than the direct arc.
  EXPECT_TRUE(u.unique);
  EXPECT_EQ(u.assignment.flow, flows({{1, 0}, {2, 0}, {3, 1}}));
  EXPECT_EQ(u.assignment.flow, exact_solve(validate(raw))->flow);
}

TEST(Detect, EmptyNetworkIsUnique) {
  const UniquenessResult u = detect_uniqueness(validate({{{1, 1}, {2, -1}}, {arc(1, 1, 2, 2, 5)}}));
  EXPECT_TRUE(u.unique);
  EXPECT_EQ(u.assignment.flow, flows({{1, 1}}));
}

TEST(Detect, AgreesWithResidualOracle) {
  int unique = 0, tied = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const FlowNetwork net = random_network(seed, 4, 6, 2, 3);
    const bool want = is_unique_optimum(net, *exact_solve(net));
    (want ? unique : tied)++;
    EXPECT_EQ(detect_uniqueness(net).unique, want) << "seed " << seed;
  }
  EXPECT_GT(unique, 0);
  EXPECT_GT(tied, 0);
}

// Message structure on integral data: slopes within t c_max, hence at most
// 2 t c_max + 1 pieces.
TEST(Structure, SlopeAndPieceBounds) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pre = preprocess_degree(random_network(seed, 5, 9, 3, 6));
    if (pre.network.arc_count() == 0) continue;
    const BpEngine<C> engine(pre.network);
    const Int cmax = pre.network.c_max();
    auto s = engine.init();
    for (Int t = 1; t <= 15; ++t) {
      s = engine.update(s);
      for (const auto* table : {&s.to_tail, &s.to_head}) {
        for (const F& m : *table) {
          for (const C& slope : m.slopes()) EXPECT_LE(std::abs(slope.get()), t * cmax);
          EXPECT_LE(static_cast<Int>(m.piece_count()), 2 * t * cmax + 1);
        }
      }
    }
  }
}

TEST(Structure, ConvexCostsStayWithinBounds) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto pre = preprocess_degree(random_network(seed, 4, 7, 3, 4, Uniqueness::kAny, 3));
    if (pre.network.arc_count() == 0) continue;
    const BpEngine<C> engine(pre.network);
    auto s = engine.init();
    for (Int t = 1; t <= 10; ++t) {
      s = engine.update(s);
      for (const F& m : s.to_tail) {
        for (const C& slope : m.slopes()) EXPECT_LE(std::abs(slope.get()), t * pre.network.c_max());
      }
    }
  }
}

TEST(Determinism, ThreadCountDoesNotMatter) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pre = preprocess_degree(random_network(seed, 8, 16, 3));
    if (pre.network.arc_count() == 0) continue;
    const BpEngine<C> one(pre.network, 1);
    const BpEngine<C> four(pre.network, 4);
    auto a = one.init();
    auto b = four.init();
    for (int t = 0; t < 12; ++t) {
      a = one.update(a);
      b = four.update(b);
      ASSERT_EQ(a, b) << "seed " << seed << " round " << t + 1;
    }
    EXPECT_EQ(to_json(a, pre.network).dump(), to_json(b, pre.network).dump());
  }
}

TEST(Determinism, BigIntegerEngineAgrees) {
  const auto pre = preprocess_degree(random_network(3, 5, 8, 3));
  const BpEngine<C> small(pre.network);
  const BpEngine<BigInt> big(pre.network);
  auto a = small.init();
  auto b = big.init();
  for (int t = 0; t < 8; ++t) {
    a = small.update(a);
    b = big.update(b);
  }
  for (std::size_t e = 0; e < pre.network.arc_count(); ++e) {
    EXPECT_EQ(a.to_tail[e], pwl_cast<C>(b.to_tail[e]));
    EXPECT_EQ(a.to_head[e], pwl_cast<C>(b.to_head[e]));
  }
}

// Shifted messages change every belief by a constant only.
TEST(Engine, NormalizedBeliefsDifferByAConstant) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const FlowNetwork net = preprocess_degree(random_network(seed, 5, 8, 3, 6)).network;
    if (net.arc_count() == 0) continue;
    const BpEngine<C> plain(net);
    const BpEngine<C> shifted(net, 1, true);
    auto a = plain.init();
    auto b = shifted.init();
    for (int t = 0; t < 25; ++t) {
      a = plain.update(a);
      b = shifted.update(b);
      for (std::size_t e = 0; e < net.arc_count(); ++e) {
        EXPECT_EQ(*b.to_tail[e](b.to_tail[e].anchor().first), C(0));
        const F pa = plain.belief(a, e);
        const F pb = shifted.belief(b, e);
        const C x0 = pa.anchor().first;
        const C offset = *pa(x0) - *pb(x0);
        for (Int z = 0; z <= *net.arc(e).capacity; ++z) {
          const auto u = pa(C(z));
          const auto v = pb(C(z));
          ASSERT_EQ(u.has_value(), v.has_value());
          if (u) {
            EXPECT_EQ(*u - *v, offset);
          }
        }
      }
      EXPECT_EQ(plain.estimate(a), shifted.estimate(b));
    }
  }
}

}  // namespace
}  // namespace flowbp
