#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flatcone {

enum class ErrorKind {
  DefectOutOfRange,
  GaussBonnetViolation,
  EmptyAlpha,
  PoleAtMultipleOf2Pi,
  BetaOutOfInterval,
  DivergentMoment,
  NonMonotoneBranch,
  ZeroDerivativeInInterior,
  NotNormalized,
  InvalidMeasure,
  WrongArity,
  MissingChild,
  QuadratureNotConverged,
  SingularityUnresolved,
  NegativeDensity,
  ArityLimitExceeded,
  InvalidConfig,
  BadDefectList,
  DimensionMismatch,
  NonPositiveArea,
  DegenerateTriangle,
  InvalidSurface,
  NotConnected,
  UnfoldingCapReached,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every module reports failures through this exception; `kind()` is the
/// machine-readable tag the CLI echoes in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace flatcone
