#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gausschan {

enum class ErrorKind {
  NonSquare,
  NonFinite,
  Overflow,
  IllConditioned,
  NoRealLog,
  NotAntisymmetric,
  Singular,
  NotPositiveDefinite,
  SingularKroneckerSum,
  DimensionMismatch,
  NotSymmetric,
  NotPSD,
  NotCP,
  Reversible,
  NumericalFailure,
  NotIdempotent,
  DegenerateNoise,
  NotGreaterNoise,
  NonPositiveDeterminant,
  Indeterminate,
  NotSymplectic,
  NotGaugeCovariant,
  InvalidArgument,
  ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure in the library is reported through this type; `kind()`
/// identifies the condition, `what()` carries the numbers behind it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gausschan
