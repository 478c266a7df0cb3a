// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include <boost/math/distributions/binomial.hpp>

#include "flowbp/cli.hpp"
#include "flowbp/flowbp.hpp"
#include "test_support.hpp"

namespace {

using namespace flowbp;
using testing::C;
using testing::F;
using testing::Q;
namespace fs = std::filesystem;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  double limit_s;  // wall-clock limit; 0 means none
  std::function<Outcome()> body;
};

std::string fmt(const std::string& f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f.c_str(), args...);
  return buf;
}

FlowNetwork gen(std::uint64_t seed, Int nodes, Int arcs, Int capmax, Int cmax, Uniqueness u, Int pieces = 1) {
  GenOptions g;
  g.nodes = nodes;
  g.arcs = arcs;
  g.capmax = capmax;
  g.cmax = cmax;
  g.uniqueness = u;
  g.cost_pieces = pieces;
  g.seed = seed;
  return generate(g);
}

Int literal_rounds(const FlowNetwork& net) {
  const Int n = static_cast<Int>(net.node_count());
  return ((n - 1) * net.c_max() / 2 + 1) * n;
}

// Instances shared between the criteria and the determinism check.
FlowNetwork crit1_instance(std::uint64_t i) {
  const Int n = 3 + static_cast<Int>(i % 6);
  return gen(1000 + i, n, n + 1 + static_cast<Int>(i % 4), 4, 8, Uniqueness::kUnique);
}

FlowNetwork crit2_instance(std::uint64_t i, bool unique) {
  const Int n = 3 + static_cast<Int>(i % 4);
  return gen(2000 + 2 * i + (unique ? 0 : 1), n, n + 2, 3, 4, unique ? Uniqueness::kUnique : Uniqueness::kNonUnique);
}

FlowNetwork crit5_instance(std::uint64_t i) {
  const Int n = 3 + static_cast<Int>(i % 3);
  return gen(5000 + i, n, n + 2, 2, 5, Uniqueness::kAny, i % 3 == 0 ? 3 : 1);
}

FlowNetwork crit7_instance() { return gen(7, 4, 6, 2, 3, Uniqueness::kNonUnique); }

FlowNetwork crit8_instance(std::uint64_t i) {
  const Int n = 3 + static_cast<Int>(i < 25 ? i % 2 : i % 4);
  return gen(8000 + i, n, n + 1, 2, 6, Uniqueness::kAny);
}

FlowNetwork crit9_instance(std::uint64_t i) {
  const Int n = 3 + static_cast<Int>(i % 4);
  return gen(9000 + i, n, n + 2, 3, 6, Uniqueness::kUnique, 3);
}

// Criteria 1 and 3 share their runs.
struct MessageAudit {
  long long messages = 0;
  long long violations = 0;
  std::string first;
};

Outcome criterion1(MessageAudit& audit) {
  int correct = 0;
  std::string bad;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const FlowNetwork net = crit1_instance(i);
    const Preprocessed pre = preprocess_degree(net);
    const Int cmax = pre.network.c_max();
    RunOptions opt;
    opt.rounds = literal_rounds(net);
    const RunResult r = with_exact_arithmetic([&]<class I>() {
      MessageAudit local;
      auto observe = [&](const BpEngine<I>&, const MessageState<I>& s) {
        const I bound = I(s.round) * I(cmax);
        for (const auto* table : {&s.to_tail, &s.to_head}) {
          for (const auto& m : *table) {
            ++local.messages;
            bool ok = true;
            // Breakpoints and slopes are integer-typed; check their order and size.
            const auto bps = m.breakpoints();
            for (std::size_t k = 1; k < bps.size(); ++k) {
              if (bps[k - 1].is_finite() && bps[k].is_finite() && !(bps[k - 1].value() < bps[k].value())) ok = false;
            }
            const auto sl = m.slopes();
            for (std::size_t k = 0; k < sl.size(); ++k) {
              if (bound < abs_value(sl[k]) || (k > 0 && !(sl[k - 1] < sl[k]))) ok = false;
            }
            if (!ok) {
              if (local.violations++ == 0) {
                local.first = fmt("instance %llu round %lld", static_cast<unsigned long long>(i),
                                  static_cast<long long>(s.round));
              }
            }
          }
        }
      };
      RunResult res = detail::run_with<I>(net, pre, opt, observe);
      audit.messages += local.messages;
      audit.violations += local.violations;
      if (audit.first.empty()) audit.first = local.first;
      return res;
    });
    const auto x = exact_solve(net);
    if (x && r.assignment.flow == x->flow) {
      ++correct;
    } else if (bad.empty()) {
      bad = fmt(" first mismatch at instance %llu", static_cast<unsigned long long>(i));
    }
  }
  return {correct == 100, fmt("%d/100 exact", correct) + bad};
}

Outcome criterion2() {
  int correct = 0, unique_seen = 0;
  std::string bad;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const bool want_unique = i < 50;
    const FlowNetwork net = crit2_instance(i, want_unique);
    const bool truth = is_unique_optimum(net, *exact_solve(net));
    unique_seen += truth;
    const UniquenessResult u = detect_uniqueness(net);
    if (u.unique == truth && (!truth || u.assignment.flow == exact_solve(net)->flow)) {
      ++correct;
    } else if (bad.empty()) {
      bad = fmt(" first miss at instance %llu", static_cast<unsigned long long>(i));
    }
  }
  return {correct == 100 && unique_seen == 50, fmt("%d/100 correct, %d unique by oracle", correct, unique_seen) + bad};
}

Outcome criterion3(const MessageAudit& audit) {
  return {audit.violations == 0 && audit.messages > 0,
          fmt("%lld messages checked, %lld violations", audit.messages, audit.violations) +
              (audit.first.empty() ? "" : " first at " + audit.first)};
}

Outcome criterion4() {
  Rng rng(4, 0);
  long long points = 0, mismatches = 0, skipped = 0;
  const auto pair_ts = brute::grid(-5, 5, 8);
  const auto xs_bounded = brute::grid(-5, 5, 8);
  const auto xs_wide = brute::grid(-11, 11, 8);
  for (int i = 0; i < 500; ++i) {
    const bool rays = i % 3 == 0;
    const F f = brute::random_pwl(rng, -5, 5, -5, 5, rays ? 1 : 0, 2);
    const F g = brute::random_pwl(rng, -5, 5, -5, 5, rays ? 1 : 0, 2);
    F h = F::zero();
    try {
      h = inf_convolve2(f, g);
    } catch (const Error& e) {
      if (e.code() != Errc::kUnbounded) throw;
      ++skipped;
      continue;
    }
    for (const Q& t : pair_ts) {
      const auto want = brute::convolve(f, g, t, rays ? xs_wide : xs_bounded);
      const auto got = h(t);
      ++points;
      if (got.has_value() != want.has_value() || (got && !(*got == *want))) ++mismatches;
    }
  }
  const auto triple_ts = brute::grid(-6, 6, 2);
  const auto xs = brute::grid(-5, 5, 1);
  for (int i = 0; i < 500; ++i) {
    std::vector<F> fs;
    std::vector<int> signs;
    for (int k = 0; k < 3; ++k) {
      fs.push_back(brute::random_pwl(rng, -5, 5, -4, 4, 0, 1));
      signs.push_back(rng.chance(1, 2) ? 1 : -1);
    }
    const F h = scaled_interpolation<C>(fs, signs);
    for (const Q& t : triple_ts) {
      const auto want = brute::scaled(fs, signs, t, xs);
      const auto got = h(t);
      ++points;
      if (got.has_value() != want.has_value() || (got && !(*got == *want))) ++mismatches;
    }
  }
  return {mismatches == 0 && skipped < 250,
          fmt("500 pairs + 500 triples, %lld grid points, %lld mismatches, %lld unbounded pairs skipped", points, mismatches,
              skipped)};
}

Outcome criterion5() {
  long long compared = 0, mismatches = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const FlowNetwork net = preprocess_degree(crit5_instance(i)).network;
    if (net.arc_count() == 0) continue;
    const BpEngine<C> engine(net);
    auto s = engine.update(engine.init());
    for (Int depth = 1; depth <= 3; ++depth) {
      s = engine.update(s);
      for (std::size_t e = 0; e < net.arc_count(); ++e) {
        const ComputationTree t = build_tree(net, net.arc(e).id, depth);
        const F b = engine.belief(s, e);
        for (Int z = 0; z <= *net.arc(e).capacity; ++z) {
          const auto tv = tree_solve(t, z);
          const auto bv = b(C(z));
          ++compared;
          if (tv.has_value() != bv.has_value() || (tv && tv->value != bv->get())) ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0 && compared > 0,
          fmt("%lld (arc, depth, flow) values, %lld mismatches; depth N vs belief after N+1 rounds", compared,
              mismatches)};
}

struct Settle {
  Int e1 = 0;
  Int e3 = 0;
  bool oscillates = false;
};

Settle fig6_settle(Int d) {
  const FlowNetwork net = instances::fig6(d);
  const Preprocessed pre = preprocess_degree(net);
  RunOptions opt;
  opt.rounds = 10 * d;
  std::vector<std::map<ArcId, Int>> history;
  detail::run_with<C>(net, pre, opt, [&](const BpEngine<C>& engine, const MessageState<C>& s) {
    history.push_back(engine.estimate(s).flow);
  });
  Settle out;
  auto settle = [&](ArcId a) {
    Int last = 0;
    for (std::size_t t = 1; t < history.size(); ++t) {
      if (history[t].at(a) != history[t - 1].at(a)) last = static_cast<Int>(t);
    }
    return last + 1;
  };
  out.e1 = settle(1);
  out.e3 = settle(3);
  std::set<Int> seen;
  for (Int t = 1; 3 * (2 * t + 1) < 2 * d; ++t) seen.insert(history[static_cast<std::size_t>(t - 1)].at(1));
  out.oscillates = seen.size() > 1;
  return out;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

Outcome criterion6() {
  const double kMinSlope = 0.2;
  std::vector<double> ds, e1, e3;
  bool osc = true, correct = true;
  std::string rows;
  for (Int d : {6, 12, 24, 48, 96}) {
    const Settle s = fig6_settle(d);
    ds.push_back(static_cast<double>(d));
    e1.push_back(static_cast<double>(s.e1));
    e3.push_back(static_cast<double>(s.e3));
    if (d >= 12) osc = osc && s.oscillates;
    RunOptions opt;
    opt.rounds = 10 * d;
    const RunResult r = run(instances::fig6(d), opt);
    correct = correct && r.assignment.flow == exact_solve(instances::fig6(d))->flow;
    rows += fmt(" D=%lld:%lld/%lld", static_cast<long long>(d), static_cast<long long>(s.e1),
                static_cast<long long>(s.e3));
  }
  const double k1 = slope(ds, e1);
  const double k3 = slope(ds, e3);
  return {k1 >= kMinSlope && osc && correct,
          fmt("settle slope e1 %.3f (min %.1f), e3 %.3f; early oscillation %s; settle e1/e3", k1, kMinSlope, k3,
              osc ? "yes" : "no") +
              rows};
}

Outcome criterion7() {
  const FlowNetwork net = crit7_instance();
  const bool base_unique = is_unique_optimum(net, *exact_solve(net));
  int unique = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const PerturbedInstance p = perturb_costs(net, {1, 2}, seed);
    unique += is_unique_optimum(p.network, *exact_solve(p.network));
  }
  const boost::math::binomial dist(200, 0.5);
  const int threshold = static_cast<int>(boost::math::quantile(dist, 0.01));
  return {!base_unique && unique >= threshold,
          fmt("%d/200 perturbations uniquely solvable, reject below %d", unique, threshold)};
}

Outcome criterion8() {
  int within = 0, trials = 0, checked_rounds = 0, violated = 0;
  std::string bad;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const FlowNetwork net = crit8_instance(i);
    const Epsilon eps = i < 25 ? Epsilon{1, 10} : Epsilon{1, 2};
    const Int opt = exact_solve(net)->objective;
    ApproxOptions ao;
    if (i % 5 == 0) {
      ao.on_round = [&](const FlowNetwork& cur, const FlowAssignment& x2, ArcId pick, const BigInt& tn,
                        const BigInt& td) {
        ++checked_rounds;
        const auto all = enumerate_integral_flows(cur);
        const Int best = all.front().objective;
        const Int v = x2.flow.at(pick);
        std::optional<Int> fixed_best;
        Int gap = std::numeric_limits<Int>::max();
        for (const FlowAssignment& x : all) {
          if (x.flow.at(pick) == v && !fixed_best) fixed_best = x.objective;
          if (x.objective == best) gap = std::min(gap, std::abs(x.flow.at(pick) - v));
        }
        if (!fixed_best ||
            BigInt(*fixed_best - best) * td > BigInt(gap) * static_cast<Int>(cur.node_count()) * tn) {
          ++violated;
        }
      };
    }
    const ApproxResult r = approx_scheme(net, eps, i, ao);
    ++trials;
    if (r.assignment.feasible && r.assignment.objective * eps.den <= opt * (eps.den + eps.num)) {
      ++within;
    } else if (bad.empty()) {
      bad = fmt(" first miss at instance %llu", static_cast<unsigned long long>(i));
    }
  }
  return {within == trials && violated == 0 && checked_rounds > 0,
          fmt("%d/%d within (1+eps) opt; per-round fixing bound on %d rounds of 10 instances, %d violations", within,
              trials, checked_rounds, violated) +
              bad};
}

Outcome criterion9() {
  int correct = 0;
  std::string bad;
  for (std::uint64_t i = 0; i < 25; ++i) {
    const FlowNetwork net = crit9_instance(i);
    const RunResult r = run(net);
    if (r.assignment.flow == exact_solve(net)->flow) {
      ++correct;
    } else if (bad.empty()) {
      bad = fmt(" first mismatch at instance %llu", static_cast<unsigned long long>(i));
    }
  }
  return {correct == 25, fmt("%d/25 exact", correct) + bad};
}

struct Cli {
  fs::path dir;

  std::string write(const std::string& name, const FlowNetwork& net) const {
    const fs::path p = dir / name;
    const bool linear = std::all_of(net.arcs().begin(), net.arcs().end(),
                                    [](const Arc& a) { return a.cost.piece_count() <= 1; });
    std::ofstream(p) << (linear ? emit_dimacs(net) : instance_to_json(net).dump());
    return p.string();
  }

  std::string call(std::vector<std::string> args) const {
    std::ostringstream out, err;
    if (cli::run(std::move(args), out, err) != 0) throw std::runtime_error("cli: " + err.str());
    return stable_part(nlohmann::json::parse(out.str())).dump();
  }

  // Two runs with one worker and one with four must agree.
  bool stable(std::vector<std::string> args) const {
    auto with = [&](const char* threads) {
      auto a = args;
      a.insert(a.end(), {"--threads", threads});
      return call(a);
    };
    const std::string first = with("1");
    return first == with("1") && first == with("4");
  }
};

Outcome criterion10() {
  Cli cli{fs::temp_directory_path() / ("flowbp_acceptance_" + std::to_string(::getpid()))};
  fs::create_directories(cli.dir);
  std::vector<std::string> failed;
  auto check = [&](const std::string& label, bool ok) {
    if (!ok) failed.push_back(label);
  };
  try {
    const FlowNetwork c1 = crit1_instance(5);
    check("1", cli.stable({"solve", "-i", cli.write("c1.dimacs", c1), "--iters",
                           std::to_string(literal_rounds(c1))}));
    check("2", cli.stable({"check-unique", "-i", cli.write("c2.dimacs", crit2_instance(1, false))}));
    check("3", cli.stable({"solve", "-i", cli.write("c3.dimacs", crit1_instance(7))}));
    {
      Rng a(4, 0), b(4, 0);
      const F f1 = brute::random_pwl(a, -5, 5, -5, 5, 0, 1), g1 = brute::random_pwl(a, -5, 5, -5, 5, 0, 1);
      const F f2 = brute::random_pwl(b, -5, 5, -5, 5, 0, 1), g2 = brute::random_pwl(b, -5, 5, -5, 5, 0, 1);
      check("4", to_json(inf_convolve2(f1, g1)).dump() == to_json(inf_convolve2(f2, g2)).dump());
    }
    {
      const FlowNetwork net = preprocess_degree(crit5_instance(1)).network;
      const ArcId root = net.arc(0).id;
      auto dump = [&] {
        std::string s;
        for (Int z = 0; z <= *net.arc(0).capacity; ++z) {
          const auto v = tree_solve(build_tree(net, root, 3), z);
          s += v ? std::to_string(v->value) + "," : "inf,";
        }
        return s;
      };
      check("5", dump() == dump() && cli.stable({"solve", "-i", cli.write("c5.dimacs", crit5_instance(1)),
                                                  "--iters", "4"}));
    }
    check("6", cli.stable({"solve", "-i", cli.write("c6.dimacs", instances::fig6(12)), "--iters", "120"}));
    {
      const FlowNetwork net = crit7_instance();
      check("7", perturb_costs(net, {1, 2}, 3).cbar == perturb_costs(net, {1, 2}, 3).cbar &&
                     cli.stable({"approx", "-i", cli.write("c7.dimacs", net), "--epsilon", "1/2", "--seed", "3"}));
    }
    check("8", cli.stable({"approx", "-i", cli.write("c8.dimacs", crit8_instance(30)), "--epsilon", "0.5", "--seed",
                           "30"}));
    check("9", cli.stable({"solve", "-i", cli.write("c9.json", crit9_instance(2))}));
  } catch (...) {
    fs::remove_all(cli.dir);
    throw;
  }
  fs::remove_all(cli.dir);
  std::string which;
  for (const auto& f : failed) which += " " + f;
  return {failed.empty(), failed.empty() ? "reports identical for criteria 1-9 (2 runs x 1 worker, 1 run x 4 workers)"
                                         : "differences for criteria" + which};
}

}  // namespace

int main() {
  MessageAudit audit;
  const std::vector<Criterion> criteria{
      {1, 120, [&] { return criterion1(audit); }},
      {2, 300, criterion2},
      {3, 0, [&] { return criterion3(audit); }},
      {4, 60, criterion4},
      {5, 120, criterion5},
      {6, 60, criterion6},
      {7, 180, criterion7},
      {8, 600, criterion8},
      {9, 180, criterion9},
      {10, 0, criterion10},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s == 0 || secs <= c.limit_s;
    const bool pass = o.ok && in_time;
    failures += !pass;
    std::string time = c.limit_s == 0 ? fmt("%.1fs", secs) : fmt("%.1fs of %.0fs", secs, c.limit_s);
    std::printf("%s %d %s [%s]\n", pass ? "PASS" : "FAIL", c.id, o.detail.c_str(), time.c_str());
    std::fflush(stdout);
  }
  return failures;
}
