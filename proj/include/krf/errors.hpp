#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace krf {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveDensity,
  NonConformingProfile,
  NormalizationFailure,
  RadiusOutOfRange,
  PositivityLoss,
  StabilityViolation,
  SolverFailure,
  ShootFailure,
  InsufficientSnapshots,
  QuadratureFailure,
  MismatchedSystems,
  MissingPotential,
  ParseError,
  NotAGermAtOrigin,
  DegenerateNewton,
  IrrationalCenter,
  NonTermination,
  InconclusiveBracket,
  InsufficientMultiplicity,
  UnsupportedSurface,
  ThresholdUndefined,
  InsufficientData,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace krf
