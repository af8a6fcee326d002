#include "ggeval/error.hpp"

namespace ggeval {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kEndpointOutOfRange: return "EndpointOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kInfeasibleInterEdges: return "InfeasibleInterEdges";
    case ErrorCode::kFeatureMismatch: return "FeatureMismatch";
    case ErrorCode::kDegenerateBatch: return "DegenerateBatch";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kDegenerateSet: return "DegenerateSet";
    case ErrorCode::kAllClustersSelected: return "AllClustersSelected";
    case ErrorCode::kHypothesisViolation: return "HypothesisViolation";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace ggeval
