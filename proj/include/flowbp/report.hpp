#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowbp/bp.hpp"
#include "flowbp/fpras.hpp"
#include "flowbp/network.hpp"

namespace flowbp {

inline constexpr const char* kReportSchema = "flowbp-report/1";

struct InstanceSummary {
  Int n = 0;
  Int m = 0;
  Int c_max = 0;
};

inline InstanceSummary summarize(const FlowNetwork& net) {
  return {static_cast<Int>(net.node_count()), static_cast<Int>(net.arc_count()), net.c_max()};
}

struct RunReport {
  std::string mode;
  InstanceSummary instance;
  InstanceSummary reduced;
  Int rounds_used = 0;
  Int rounds_planned = 0;
  std::optional<bool> unique;
  FlowAssignment assignment;  // on the instance as given; objective recomputed by finalize()
  std::optional<std::uint64_t> seed;
  std::optional<std::string> epsilon;
  std::vector<DecimationStep> steps;
  std::vector<PieceStats> pieces;
  bool big_integers = false;
  double wall_time_ms = 0;

  // Recomputes objective and feasibility from the original costs.
  void finalize(const FlowNetwork& original) {
    const bool flag = assignment.maybe_non_unique;
    assignment = evaluate_flow(original, assignment.flow);
    assignment.maybe_non_unique = flag;
  }

  nlohmann::json to_json() const {
    nlohmann::json flow = nlohmann::json::array();
    for (const auto& [id, x] : assignment.flow) flow.push_back({{"arc", id}, {"flow", x}});
    auto summary = [](const InstanceSummary& s) {
      return nlohmann::json{{"n", s.n}, {"m", s.m}, {"c_max", s.c_max}};
    };
    nlohmann::json j{{"schema", kReportSchema},
                     {"mode", mode},
                     {"instance", summary(instance)},
                     {"reduced", summary(reduced)},
                     {"rounds_used", rounds_used},
                     {"rounds_planned", rounds_planned},
                     {"feasible", assignment.feasible},
                     {"maybe_non_unique", assignment.maybe_non_unique},
                     {"objective", assignment.objective},
                     {"flow", flow},
                     {"arithmetic", big_integers ? "bigint" : "int64"},
                     {"wall_time_ms", wall_time_ms}};
    if (unique) j["unique"] = *unique;
    if (seed) j["seed"] = *seed;
    if (epsilon) j["epsilon"] = *epsilon;
    if (mode == "approx") {
      nlohmann::json log = nlohmann::json::array();
      for (const auto& s : steps) {
        log.push_back({{"fixed_arc", s.fixed_arc},
                       {"value", s.value},
                       {"restarts", s.restarts},
                       {"cbar_max", s.cbar_max},
                       {"rounds", s.rounds}});
      }
      j["decimation"] = log;
    }
    if (!pieces.empty()) {
      nlohmann::json totals = nlohmann::json::array();
      std::size_t mx = 0;
      for (const auto& p : pieces) {
        totals.push_back(p.total);
        mx = std::max(mx, p.max);
      }
      j["pieces"] = {{"max", mx}, {"per_round_total", totals}};
    }
    return j;
  }
};

// The report without fields that vary between identical runs.
inline nlohmann::json stable_part(nlohmann::json report) {
  report.erase("wall_time_ms");
  return report;
}

}  // namespace flowbp
