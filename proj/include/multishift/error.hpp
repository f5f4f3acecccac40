#pragma once

#include <stdexcept>
#include <string>

namespace multishift {

enum class ErrorCode {
  NonHermitian,
  NoConvergence,
  CholeskyFail,
  RankDeficient,
  SingularC,
  ValidationFailed,
  DimMismatch,
  IndexOutOfRange,
  DimensionCap,
  Schema,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying one of the library error kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace multishift
