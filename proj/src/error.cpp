#include "psc/error.hpp"

namespace psc {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kDimensionExhausted: return "DimensionExhausted";
    case ErrorCode::kDegenerateGram: return "DegenerateGram";
    case ErrorCode::kUnknownSamplerId: return "UnknownSamplerId";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kInvalidCode: return "InvalidCode";
    case ErrorCode::kCorruptStream: return "CorruptStream";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kPriorMismatch: return "PriorMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kFormat: return "Format";
  }
  return "Unknown";
}

PscError::PscError(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
      code_(code) {}

void fail(ErrorCode code, const std::string& what) {
  throw PscError(code, what);
}

}  // namespace psc
