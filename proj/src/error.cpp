#include "flatcone/error.hpp"

namespace flatcone {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DefectOutOfRange: return "DefectOutOfRange";
    case ErrorKind::GaussBonnetViolation: return "GaussBonnetViolation";
    case ErrorKind::EmptyAlpha: return "EmptyAlpha";
    case ErrorKind::PoleAtMultipleOf2Pi: return "PoleAtMultipleOf2Pi";
    case ErrorKind::BetaOutOfInterval: return "BetaOutOfInterval";
    case ErrorKind::DivergentMoment: return "DivergentMoment";
    case ErrorKind::NonMonotoneBranch: return "NonMonotoneBranch";
    case ErrorKind::ZeroDerivativeInInterior: return "ZeroDerivativeInInterior";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::InvalidMeasure: return "InvalidMeasure";
    case ErrorKind::WrongArity: return "WrongArity";
    case ErrorKind::MissingChild: return "MissingChild";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::SingularityUnresolved: return "SingularityUnresolved";
    case ErrorKind::NegativeDensity: return "NegativeDensity";
    case ErrorKind::ArityLimitExceeded: return "ArityLimitExceeded";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::BadDefectList: return "BadDefectList";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonPositiveArea: return "NonPositiveArea";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::InvalidSurface: return "InvalidSurface";
    case ErrorKind::NotConnected: return "NotConnected";
    case ErrorKind::UnfoldingCapReached: return "UnfoldingCapReached";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace flatcone
