#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vton {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kUnknownDtype,
  kPayloadMismatch,
  kNonFinite,
  kParse,
  kDuplicateId,
  kOutOfRange,
  kDimensionMismatch,
  kDegenerate,
  kNotFound,
  kNotPositiveSemidefinite,
  kUndefinedCorrelation,
  // VLM response handling; kept distinct for retry accounting.
  kMalformedResponse,
  kMissingField,
  kScoreOutOfRange,
  kTransport,
  kAuth,
  kExhausted,
  // Study service.
  kUnknownAssignment,
  kExpiredAssignment,
  kDoubleSubmission,
  kNotOwner,
  kNoRemainingItems,
  kNoResults,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace vton
