#include "gausschan/error.hpp"

namespace gausschan {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NoRealLog: return "NoRealLog";
    case ErrorKind::NotAntisymmetric: return "NotAntisymmetric";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularKroneckerSum: return "SingularKroneckerSum";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotCP: return "NotCP";
    case ErrorKind::Reversible: return "Reversible";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::NotIdempotent: return "NotIdempotent";
    case ErrorKind::DegenerateNoise: return "DegenerateNoise";
    case ErrorKind::NotGreaterNoise: return "NotGreaterNoise";
    case ErrorKind::NonPositiveDeterminant: return "NonPositiveDeterminant";
    case ErrorKind::Indeterminate: return "Indeterminate";
    case ErrorKind::NotSymplectic: return "NotSymplectic";
    case ErrorKind::NotGaugeCovariant: return "NotGaugeCovariant";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace gausschan
