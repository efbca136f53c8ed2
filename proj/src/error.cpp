#include "lobsim/error.hpp"

namespace lobsim {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::BadResetDistribution: return "BadResetDistribution";
    case ErrorCode::NStarTooSmall: return "NStarTooSmall";
    case ErrorCode::StartOnBoundary: return "StartOnBoundary";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::BisectionNoConvergence: return "BisectionNoConvergence";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  return code == ErrorCode::EigenSolverFailure ||
         code == ErrorCode::BisectionNoConvergence ||
         code == ErrorCode::InternalConsistency;
}

}  // namespace lobsim
