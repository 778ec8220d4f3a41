#include "bachgeom/error.hpp"

namespace bachgeom {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kPointOutsideChart: return "point-outside-chart";
    case ErrorCode::kJetInconsistent: return "jet-inconsistent";
    case ErrorCode::kPdViolation: return "pd-violation";
    case ErrorCode::kInsufficientJetOrder: return "insufficient-jet-order";
    case ErrorCode::kNotDimension4: return "not-dimension-4";
    case ErrorCode::kNonFiniteValue: return "non-finite-value";
    case ErrorCode::kRankMismatch: return "rank-mismatch";
    case ErrorCode::kFactorNotPositive: return "factor-not-positive";
    case ErrorCode::kNonPeriodicGrid: return "non-periodic-grid";
    case ErrorCode::kBachVanishes: return "bach-vanishes";
    case ErrorCode::kNoConvergence: return "no-convergence";
    case ErrorCode::kZeroDenominator: return "zero-denominator";
    case ErrorCode::kHypothesisFailed: return "hypothesis-failed";
    case ErrorCode::kDescentStalled: return "descent-stalled";
    case ErrorCode::kPositivityLost: return "positivity-lost";
    case ErrorCode::kInfeasibleDelta: return "infeasible-delta";
    case ErrorCode::kPhiNotNegative: return "phi-not-negative";
    case ErrorCode::kBachDegenerate: return "bach-degenerate";
    case ErrorCode::kAllCandidatesDegenerate: return "all-candidates-degenerate";
    case ErrorCode::kConfigParse: return "config-parse";
    case ErrorCode::kUnknownMetric: return "unknown-metric";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace bachgeom
