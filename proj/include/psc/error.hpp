#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psc {

enum class ErrorCode {
  kRankDeficient,
  kNotSymmetric,
  kDimensionExhausted,
  kDegenerateGram,
  kUnknownSamplerId,
  kNonFiniteInput,
  kInvalidCode,
  kCorruptStream,
  kConfigInvalid,
  kChecksumMismatch,
  kPriorMismatch,
  kShapeMismatch,
  kIo,
  kFormat,
};

std::string_view error_code_name(ErrorCode code);

// Every failure in the library surfaces as a PscError; callers branch on
// code() rather than on message text.
class PscError : public std::runtime_error {
 public:
  PscError(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace psc
