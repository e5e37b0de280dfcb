#pragma once

#include <stdexcept>
#include <string>

namespace ccg {

// Numeric values are part of the C ABI (see include/ccg/ccg.h).
enum class ErrorCode : int {
  InvalidModel = 1,
  SingularSystem = 2,
  BogoliubovViolation = 3,
  OutOfSupport = 4,
  NoDip = 5,
  ZeroNorm = 6,
  UnknownLabel = 7,
  SvdFailure = 8,
  InvalidArgument = 9,
  Config = 10,
  Calibration = 11,
  Io = 12,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ccg
