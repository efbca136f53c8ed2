#pragma once

#include <stdexcept>
#include <string>

namespace lobsim {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveRate,
  BadResetDistribution,
  NStarTooSmall,
  StartOnBoundary,
  ConfigError,
  IoError,
  EigenSolverFailure,
  BisectionNoConvergence,
  InternalConsistency,
};

const char* error_code_name(ErrorCode code) noexcept;

// True for failures of the numerics rather than of the inputs.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lobsim
