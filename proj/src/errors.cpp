#include "gpjet/errors.hpp"

namespace gpjet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::SingularAssembly: return "SingularAssembly";
    case ErrorCode::IntegrationFailure: return "IntegrationFailure";
    case ErrorCode::PoleSingularity: return "PoleSingularity";
    case ErrorCode::NegativeRatio: return "NegativeRatio";
    case ErrorCode::UnstableRegime: return "UnstableRegime";
    case ErrorCode::NonPositiveRatio: return "NonPositiveRatio";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NestedDesignViolation: return "NestedDesignViolation";
    case ErrorCode::GridExhausted: return "GridExhausted";
    case ErrorCode::GeometryOverflow: return "GeometryOverflow";
    case ErrorCode::RowMismatch: return "RowMismatch";
    case ErrorCode::NoDeposition: return "NoDeposition";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gpjet
