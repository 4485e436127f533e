#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lqrlag {

enum class ErrorCode {
  NonPositiveEigenvalue,
  NotSorted,
  IndexOutOfRange,
  NegativeTime,
  SingularShift,
  NegativeBeta,
  OddLength,
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  NotADirectSum,
  NotAGraph,
  SpectrumOnAxis,
  DiagonalOfKernel,
  HorizonTooShort,
  TailNotCertified,
  ConditionFailed,
  SingularF3,
  NotLagrange,
  FrequencyConditionFailed,
  Oscillating,
  NotATrajectory,
  SampleNotInM0,
  EpsilonTooLarge,
  NoCandidate,
  AValueOutOfRange,
  InvalidConfig,
  NotAContraction,
  ContractionFailed,
  NotInFiber,
  NotPositive,
  AmplitudeTooLarge,
  ParseError,
  MissingField,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for codes that describe malformed input rather than a failed check.
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace lqrlag
