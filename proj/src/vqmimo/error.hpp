#pragma once

#include <stdexcept>
#include <string>

namespace vqmimo {

// Values are part of the C ABI (see vqmimo.h) and of the CLI exit codes.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kNonFinite = 3,
  kNumerical = 4,
  kSingular = 5,
  kDegenerateOutput = 6,
  kIo = 7,
  kFormat = 8,
  kFingerprintMismatch = 9,
  kConfig = 10,
  kUnknownFlag = 11,
  kNotImplemented = 12,
  kMissingCheckpoint = 13,
  kInternal = 14,
};

const char* error_category(ErrorCode code) noexcept;

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

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace vqmimo
