#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ggeval {

enum class ErrorCode {
  kSelfLoop,
  kEndpointOutOfRange,
  kParseError,
  kInvariantViolation,
  kInfeasibleInterEdges,
  kFeatureMismatch,
  kDegenerateBatch,
  kNonFiniteGradient,
  kDimensionMismatch,
  kTooFewRows,
  kKTooLarge,
  kDegenerateSet,
  kAllClustersSelected,
  kHypothesisViolation,
  kInvalidArgument,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries a code so callers (and the CLI)
// can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ggeval
