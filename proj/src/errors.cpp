#include "krf/errors.hpp"

namespace krf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::NonConformingProfile: return "NonConformingProfile";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::PositivityLoss: return "PositivityLoss";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ShootFailure: return "ShootFailure";
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::MismatchedSystems: return "MismatchedSystems";
    case ErrorCode::MissingPotential: return "MissingPotential";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NotAGermAtOrigin: return "NotAGermAtOrigin";
    case ErrorCode::DegenerateNewton: return "DegenerateNewton";
    case ErrorCode::IrrationalCenter: return "IrrationalCenter";
    case ErrorCode::NonTermination: return "NonTermination";
    case ErrorCode::InconclusiveBracket: return "InconclusiveBracket";
    case ErrorCode::InsufficientMultiplicity: return "InsufficientMultiplicity";
    case ErrorCode::UnsupportedSurface: return "UnsupportedSurface";
    case ErrorCode::ThresholdUndefined: return "ThresholdUndefined";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace krf
