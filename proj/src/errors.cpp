#include "lqrlag/errors.hpp"

namespace lqrlag {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::NotSorted: return "NotSorted";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::NegativeBeta: return "NegativeBeta";
    case ErrorCode::OddLength: return "OddLength";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotADirectSum: return "NotADirectSum";
    case ErrorCode::NotAGraph: return "NotAGraph";
    case ErrorCode::SpectrumOnAxis: return "SpectrumOnAxis";
    case ErrorCode::DiagonalOfKernel: return "DiagonalOfKernel";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::TailNotCertified: return "TailNotCertified";
    case ErrorCode::ConditionFailed: return "ConditionFailed";
    case ErrorCode::SingularF3: return "SingularF3";
    case ErrorCode::NotLagrange: return "NotLagrange";
    case ErrorCode::FrequencyConditionFailed: return "FrequencyConditionFailed";
    case ErrorCode::Oscillating: return "Oscillating";
    case ErrorCode::NotATrajectory: return "NotATrajectory";
    case ErrorCode::SampleNotInM0: return "SampleNotInM0";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::AValueOutOfRange: return "AValueOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NotAContraction: return "NotAContraction";
    case ErrorCode::ContractionFailed: return "ContractionFailed";
    case ErrorCode::NotInFiber: return "NotInFiber";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::AmplitudeTooLarge: return "AmplitudeTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::MissingField:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotSymmetric:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::NonPositiveEigenvalue:
    case ErrorCode::NotSorted:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::InvalidConfig:
    case ErrorCode::AmplitudeTooLarge:
    case ErrorCode::IoError:
      return true;
    default:
      return false;
  }
}

}  // namespace lqrlag
