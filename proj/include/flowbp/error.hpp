#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowbp {

enum class Errc {
  kNonConvex,
  kMalformedDomain,
  kAnchorOutOfDomain,
  kUnbounded,
  kEmptyDomain,
  kSelfLoop,
  kDemandImbalance,
  kBadCostDomain,
  kNegativeCapacity,
  kDuplicateId,
  kUnknownNode,
  kNonZeroLowerBound,
  kSyntaxError,
  kInconsistent,
  kForcedInfeasible,
  kInfeasibleFlow,
  kInfeasible,
  kUnboundedObjective,
  kBudgetExceeded,
  kNotOptimal,
  kSizeBudget,
  kZeroCostInstance,
  kRestartBudgetExceeded,
  kValueOutOfRange,
  kInfeasibleAfterFix,
  kGenerationBudget,
  kUnsupported,
  kOverflow,
  kUsage,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kNonConvex: return "non_convex";
    case Errc::kMalformedDomain: return "malformed_domain";
    case Errc::kAnchorOutOfDomain: return "anchor_out_of_domain";
    case Errc::kUnbounded: return "unbounded";
    case Errc::kEmptyDomain: return "empty_domain";
    case Errc::kSelfLoop: return "self_loop";
    case Errc::kDemandImbalance: return "demand_imbalance";
    case Errc::kBadCostDomain: return "bad_cost_domain";
    case Errc::kNegativeCapacity: return "negative_capacity";
    case Errc::kDuplicateId: return "duplicate_id";
    case Errc::kUnknownNode: return "unknown_node";
    case Errc::kNonZeroLowerBound: return "nonzero_lower_bound";
    case Errc::kSyntaxError: return "syntax_error";
    case Errc::kInconsistent: return "inconsistent";
    case Errc::kForcedInfeasible: return "forced_infeasible";
    case Errc::kInfeasibleFlow: return "infeasible_flow";
    case Errc::kInfeasible: return "infeasible";
    case Errc::kUnboundedObjective: return "unbounded_objective";
    case Errc::kBudgetExceeded: return "budget_exceeded";
    case Errc::kNotOptimal: return "not_optimal";
    case Errc::kSizeBudget: return "size_budget";
    case Errc::kZeroCostInstance: return "zero_cost_instance";
    case Errc::kRestartBudgetExceeded: return "restart_budget_exceeded";
    case Errc::kValueOutOfRange: return "value_out_of_range";
    case Errc::kInfeasibleAfterFix: return "infeasible_after_fix";
    case Errc::kGenerationBudget: return "generation_budget";
    case Errc::kUnsupported: return "unsupported";
    case Errc::kOverflow: return "overflow";
    case Errc::kUsage: return "usage";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace flowbp
