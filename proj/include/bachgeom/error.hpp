#pragma once

#include <stdexcept>
#include <string>

namespace bachgeom {

/// Failure categories. The numeric values are the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kInvalidSpec = 2,
  kPointOutsideChart = 3,
  kJetInconsistent = 4,
  kPdViolation = 5,
  kInsufficientJetOrder = 6,
  kNotDimension4 = 7,
  kNonFiniteValue = 8,
  kRankMismatch = 9,
  kFactorNotPositive = 10,
  kNonPeriodicGrid = 11,
  kBachVanishes = 12,
  kNoConvergence = 13,
  kZeroDenominator = 14,
  kHypothesisFailed = 15,
  kDescentStalled = 16,
  kPositivityLost = 17,
  kInfeasibleDelta = 18,
  kPhiNotNegative = 19,
  kBachDegenerate = 20,
  kAllCandidatesDegenerate = 21,
  kConfigParse = 22,
  kUnknownMetric = 23,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace bachgeom
