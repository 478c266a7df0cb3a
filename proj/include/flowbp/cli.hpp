#pragma once

// flowbp command line: solve, check-unique, approx, gen, selftest, bench.
// Reports go to stdout as JSON; diagnostics go to stderr.
//
// Exit codes: 0 ok, 1 usage or other error, 2 infeasible instance,
// 3 unreadable or invalid instance, 4 restart budget exhausted.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowbp/bp.hpp"
#include "flowbp/fpras.hpp"
#include "flowbp/generate.hpp"
#include "flowbp/instance_io.hpp"
#include "flowbp/instances.hpp"
#include "flowbp/oracles.hpp"
#include "flowbp/pwl_brute.hpp"
#include "flowbp/report.hpp"

namespace flowbp::cli {

inline int exit_code(Errc c) {
  switch (c) {
    case Errc::kInfeasible:
    case Errc::kForcedInfeasible:
      return 2;
    case Errc::kSyntaxError:
    case Errc::kInconsistent:
    case Errc::kNonZeroLowerBound:
    case Errc::kMalformedDomain:
    case Errc::kNonConvex:
    case Errc::kAnchorOutOfDomain:
    case Errc::kSelfLoop:
    case Errc::kDemandImbalance:
    case Errc::kBadCostDomain:
    case Errc::kNegativeCapacity:
    case Errc::kDuplicateId:
    case Errc::kUnknownNode:
      return 3;
    case Errc::kRestartBudgetExceeded:
      return 4;
    default:
      return 1;
  }
}

struct Common {
  std::string input;
  std::string format = "auto";
  unsigned threads = 1;
};

inline Format parse_format(const std::string& f) {
  if (f == "dimacs") return Format::kDimacs;
  if (f == "json") return Format::kJson;
  return Format::kAuto;
}

inline std::uint64_t seed_or_env(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("FLOWBP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(Errc::kUsage, std::string("FLOWBP_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

// Loads, checks feasibility with the exact solver and preprocesses.
struct Loaded {
  Instance instance;
  FlowNetwork original;
  Preprocessed pre;
};

inline Loaded load_checked(const Common& c) {
  Instance inst = load_instance(c.input, parse_format(c.format));
  FlowNetwork original = inst.original();
  if (!exact_solve(inst.network)) throw Error(Errc::kInfeasible, "instance has no feasible flow");
  Preprocessed pre = preprocess_degree(inst.network);
  return {std::move(inst), std::move(original), std::move(pre)};
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline void emit(std::ostream& out, RunReport& r, const Loaded& l) {
  r.instance = summarize(l.original);
  r.reduced = summarize(l.pre.network);
  r.assignment = l.instance.to_original(r.assignment);
  r.finalize(l.original);
  out << r.to_json().dump(2) << '\n';
}

inline int cmd_solve(const Common& c, const std::string& iters, const std::string& dump_path, Int patience,
                     std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Loaded l = load_checked(c);
  RunOptions opt;
  opt.threads = c.threads;
  opt.patience = patience;
  opt.record_pieces = true;
  if (iters != "auto") {
    try {
      std::size_t used = 0;
      opt.rounds = std::stoll(iters, &used);
      if (used != iters.size() || *opt.rounds < 0) throw std::invalid_argument(iters);
    } catch (const std::exception&) {
      throw Error(Errc::kUsage, "--iters takes a non-negative integer or 'auto'");
    }
  }
  std::ofstream dump;
  if (!dump_path.empty()) {
    dump.open(dump_path);
    if (!dump) throw Error(Errc::kUsage, "cannot write " + dump_path);
    opt.dump = [&dump](const nlohmann::json& j) { dump << j.dump() << '\n'; };
  }
  const RunResult res = run(l.instance.network, opt);
  RunReport r;
  r.mode = "solve";
  r.rounds_used = res.rounds_used;
  r.rounds_planned = res.rounds_planned;
  r.assignment = res.assignment;
  r.pieces = res.pieces;
  r.big_integers = res.big_integers;
  r.wall_time_ms = ms_since(t0);
  emit(out, r, l);
  return 0;
}

inline int cmd_check_unique(const Common& c, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Loaded l = load_checked(c);
  const UniquenessResult u = detect_uniqueness(l.instance.network, c.threads);
  RunReport r;
  r.mode = "check-unique";
  r.rounds_used = r.rounds_planned = u.rounds;
  r.unique = u.unique;
  r.assignment = u.assignment;
  r.wall_time_ms = ms_since(t0);
  emit(out, r, l);
  return 0;
}

inline int cmd_approx(const Common& c, const std::string& eps_text, std::optional<std::uint64_t> seed_opt,
                      Int restart_budget, std::ostream& out) {
  const Epsilon eps = Epsilon::parse(eps_text);
  const std::uint64_t seed = seed_or_env(seed_opt);
  const auto t0 = std::chrono::steady_clock::now();
  Loaded l = load_checked(c);
  ApproxOptions opt;
  opt.restart_budget = restart_budget;
  opt.threads = c.threads;
  const ApproxResult a = approx_scheme(l.instance.network, eps, seed, opt);
  RunReport r;
  r.mode = "approx";
  r.seed = seed;
  r.epsilon = eps.str();
  r.assignment = a.assignment;
  r.steps = a.steps;
  for (const auto& s : a.steps) r.rounds_used += s.rounds;
  r.rounds_planned = r.rounds_used;
  r.wall_time_ms = ms_since(t0);
  emit(out, r, l);
  return 0;
}

inline int cmd_gen(GenOptions g, bool ensure_unique, const std::string& format, const std::string& output,
                   std::ostream& out) {
  if (ensure_unique) g.uniqueness = Uniqueness::kUnique;
  const FlowNetwork net = generate(g);
  const std::string text = format == "json" || (format == "auto" && g.cost_pieces > 1)
                               ? instance_to_json(net).dump(2) + "\n"
                               : emit_dimacs(net);
  if (output.empty() || output == "-") {
    out << text;
  } else {
    std::ofstream f(output);
    if (!f) throw Error(Errc::kUsage, "cannot write " + output);
    f << text;
  }
  return 0;
}

// Built-in consistency checks against the oracles.
inline int cmd_selftest(bool quick, std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : " (" + detail + ")") << '\n';
    if (!ok) ++failures;
  };
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      check(name, false, e.what());
    }
  };
  const int scale = quick ? 1 : 5;

  guarded("pwl interpolation vs grid", [&] {
    Rng rng(1, 1);
    const auto ts = brute::grid(-5, 5, 8);
    const auto xs = brute::grid(-11, 11, 8);
    int bad = 0;
    for (int i = 0; i < 40 * scale; ++i) {
      auto f = brute::random_pwl(rng, -5, 5, -5, 5, 1, 3);
      auto g = brute::random_pwl(rng, -5, 5, -5, 5, 1, 3);
      std::optional<brute::F> h;
      try {
        h = inf_convolve2(f, g);
      } catch (const Error& e) {
        if (e.code() != Errc::kUnbounded) throw;
        continue;
      }
      for (const auto& t : ts) {
        auto a = (*h)(t);
        auto b = brute::convolve(f, g, t, xs);
        if (a.has_value() != b.has_value() || (a && !(*a == *b))) ++bad;
      }
    }
    check("pwl interpolation vs grid", bad == 0, std::to_string(bad) + " mismatches");
  });

  guarded("T1 solve and uniqueness", [&] {
    const auto net = instances::t1();
    const RunResult r = run(net);
    const bool ok = r.rounds_used == 12 && r.assignment.objective == 2 && r.assignment.feasible &&
                    detect_uniqueness(net).unique && !detect_uniqueness(instances::t1(2)).unique;
    check("T1 solve and uniqueness", ok);
  });

  guarded("exact solver vs enumeration", [&] {
    int bad = 0;
    for (int i = 0; i < 20 * scale; ++i) {
      GenOptions g;
      g.nodes = 3 + i % 3;
      g.arcs = g.nodes + 1 + i % 2;
      g.capmax = 2;
      g.seed = 100 + static_cast<std::uint64_t>(i);
      const auto net = generate(g);
      const auto all = enumerate_integral_flows(net);
      const auto x = exact_solve(net);
      if (all.empty() != !x.has_value() || (x && x->objective != all.front().objective)) ++bad;
    }
    check("exact solver vs enumeration", bad == 0, std::to_string(bad) + " mismatches");
  });

  guarded("belief equals computation-tree optimum", [&] {
    int bad = 0;
    for (int i = 0; i < 4 * scale; ++i) {
      GenOptions g;
      g.nodes = 4;
      g.arcs = 5;
      g.capmax = 2;
      g.seed = 300 + static_cast<std::uint64_t>(i);
      const auto pre = preprocess_degree(generate(g));
      if (pre.network.arc_count() == 0) continue;
      BpEngine<CheckedInt> engine(pre.network);
      auto s = engine.init();
      for (Int depth = 0; depth <= 2; ++depth) {
        s = engine.update(s);
        for (std::size_t e = 0; e < pre.network.arc_count(); ++e) {
          const auto tree = build_tree(pre.network, pre.network.arc(e).id, depth);
          const auto b = engine.belief(s, e);
          for (Int z = 0; z <= *pre.network.arc(e).capacity; ++z) {
            auto tv = tree_solve(tree, z);
            auto bv = b(CheckedInt(z));
            if (tv.has_value() != bv.has_value() || (tv && tv->value != bv->get())) ++bad;
          }
        }
      }
    }
    check("belief equals computation-tree optimum", bad == 0, std::to_string(bad) + " mismatches");
  });

  guarded("convergence on unique instances", [&] {
    int bad = 0;
    for (int i = 0; i < 4 * scale; ++i) {
      GenOptions g;
      g.nodes = 4 + i % 2;
      g.arcs = g.nodes + 2;
      g.cmax = 5;
      g.capmax = 3;
      g.uniqueness = Uniqueness::kUnique;
      g.seed = 500 + static_cast<std::uint64_t>(i);
      const auto net = generate(g);
      if (run(net).assignment.flow != exact_solve(net)->flow) ++bad;
    }
    check("convergence on unique instances", bad == 0, std::to_string(bad) + " mismatches");
  });

  guarded("hard triangle settles later for larger D", [&] {
    auto settle = [](Int d) {
      const auto net = instances::fig6(d);
      BpEngine<CheckedInt> engine(net);
      auto s = engine.init();
      Int last_change = 0;
      Int prev = -1;
      for (Int t = 1; t <= 8 * d; ++t) {
        s = engine.update(s);
        const Int x = engine.estimate(s).flow.at(1);
        if (x != prev) last_change = t;
        prev = x;
      }
      return last_change;
    };
    check("hard triangle settles later for larger D", settle(6) < settle(12) && settle(12) < settle(24));
  });

  guarded("approximation on T1", [&] {
    const ApproxResult a = approx_scheme(instances::t1(), Epsilon{1, 2}, 7);
    check("approximation on T1", a.assignment.feasible && a.assignment.objective <= 3,
          "objective " + std::to_string(a.assignment.objective));
  });

  out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " checks failed") << '\n';
  return failures == 0 ? 0 : 1;
}

// Message-update throughput on generated instances.
inline int cmd_bench(Int nodes, Int arcs, Int rounds, unsigned threads, std::uint64_t seed, std::ostream& out) {
  GenOptions g;
  g.nodes = nodes;
  g.arcs = arcs;
  g.seed = seed;
  const auto pre = preprocess_degree(generate(g));
  nlohmann::json j{{"nodes", pre.network.node_count()}, {"arcs", pre.network.arc_count()},
                   {"rounds", rounds}, {"threads", threads}};
  if (pre.network.arc_count() > 0) {
    auto time_rounds = [&]<class I>() {
      BpEngine<I> engine(pre.network, threads);
      auto s = engine.init();
      const auto t0 = std::chrono::steady_clock::now();
      for (Int t = 0; t < rounds; ++t) s = engine.update(s);
      return std::pair{ms_since(t0), piece_stats(s).total};
    };
    bool big = false;
    std::pair<double, std::size_t> timed;
    try {
      timed = time_rounds.template operator()<CheckedInt>();
    } catch (const Error& e) {
      if (e.code() != Errc::kOverflow) throw;
      big = true;
      timed = time_rounds.template operator()<BigInt>();
    }
    const double ms = timed.first;
    j["arithmetic"] = big ? "bigint" : "int64";
    j["wall_time_ms"] = ms;
    j["us_per_message"] = ms * 1000.0 / static_cast<double>(rounds * 2 * static_cast<Int>(pre.network.arc_count()));
    j["final_pieces"] = timed.second;
  }
  out << j.dump(2) << '\n';
  return 0;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Min-cost flow by belief propagation", "flowbp"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input,-i", common.input, "instance file (DIMACS min or JSON)")->required();
    sub->add_option("--format", common.format, "dimacs, json or auto")
        ->check(CLI::IsMember({"auto", "dimacs", "json"}));
    sub->add_option("--threads", common.threads, "worker threads")->check(CLI::Range(1u, 256u));
  };

  std::string iters = "auto";
  std::string dump_path;
  Int patience = 0;
  auto* solve = app.add_subcommand("solve", "run BP and report the estimate");
  add_common(solve);
  solve->add_option("--iters", iters, "number of rounds or 'auto'");
  solve->add_option("--dump-messages", dump_path, "write every round's messages as JSON lines");
  solve->add_option("--patience", patience, "stop after this many rounds without change (0: off)")
      ->check(CLI::NonNegativeNumber);

  auto* unique = app.add_subcommand("check-unique", "decide whether the optimum is unique");
  add_common(unique);

  std::string eps = "1/2";
  std::optional<std::uint64_t> seed;
  Int restart_budget = 64;
  auto* approx = app.add_subcommand("approx", "randomized (1+eps)-approximation");
  add_common(approx);
  approx->add_option("--epsilon", eps, "accuracy in (0, 1), e.g. 1/2 or 0.1");
  approx->add_option("--seed", seed, "random seed (default: $FLOWBP_SEED or 0)");
  approx->add_option("--restart-budget", restart_budget)->check(CLI::PositiveNumber);

  GenOptions gen_opt;
  bool ensure_unique = false;
  std::string gen_format = "auto";
  std::string output;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("gen", "write a random feasible instance");
  gen->add_option("--nodes", gen_opt.nodes)->required();
  gen->add_option("--arcs", gen_opt.arcs)->required();
  gen->add_option("--cmax", gen_opt.cmax);
  gen->add_option("--capmax", gen_opt.capmax);
  gen->add_option("--cost-pieces", gen_opt.cost_pieces, "pieces per convex arc cost (1: linear)");
  gen->add_option("--seed", gen_seed);
  gen->add_flag("--ensure-unique", ensure_unique);
  gen->add_option("--format", gen_format)->check(CLI::IsMember({"auto", "dimacs", "json"}));
  gen->add_option("--output,-o", output);

  bool quick = false;
  auto* selftest = app.add_subcommand("selftest", "check the solvers against the oracles");
  selftest->add_flag("--quick", quick);

  Int bench_nodes = 20, bench_arcs = 40, bench_rounds = 200;
  std::uint64_t bench_seed = 1;
  unsigned bench_threads = 1;
  auto* bench = app.add_subcommand("bench", "time message updates");
  bench->add_option("--nodes", bench_nodes);
  bench->add_option("--arcs", bench_arcs);
  bench->add_option("--rounds", bench_rounds);
  bench->add_option("--threads", bench_threads)->check(CLI::Range(1u, 256u));
  bench->add_option("--seed", bench_seed);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "flowbp: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*solve) return cmd_solve(common, iters, dump_path, patience, out);
    if (*unique) return cmd_check_unique(common, out);
    if (*approx) return cmd_approx(common, eps, seed, restart_budget, out);
    if (*gen) {
      gen_opt.seed = seed_or_env(gen_seed);
      return cmd_gen(gen_opt, ensure_unique, gen_format, output, out);
    }
    if (*selftest) return cmd_selftest(quick, out);
    if (*bench) return cmd_bench(bench_nodes, bench_arcs, bench_rounds, bench_threads, bench_seed, out);
  } catch (const Error& e) {
    out << nlohmann::json{{"schema", kReportSchema},
                          {"error", {{"code", errc_name(e.code())}, {"message", e.what()}}}}
               .dump(2)
        << '\n';
    err << "flowbp: " << e.what() << '\n';
    return exit_code(e.code());
  }
  return 1;
}

}  // namespace flowbp::cli
