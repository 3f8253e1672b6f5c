#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qhl {

enum class ErrorCode {
  NonPositiveMetric,
  BadLattice,
  TruncationTooSmall,
  SingularGram,
  BasePoint,
  OutOfBudget,
  IllConditioned,
  NoConvergence,
  IllConditionedFit,
  InvalidArgument,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveMetric: return "NonPositiveMetric";
    case ErrorCode::BadLattice: return "BadLattice";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::BasePoint: return "BasePoint";
    case ErrorCode::OutOfBudget: return "OutOfBudget";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qhl
