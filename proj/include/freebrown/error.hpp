#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace freebrown {

enum class ErrorCode {
  InvalidMeasure,
  InversionOfAtomAtZero,
  PointOnSupport,
  OutOfDomain,
  DeltaZeroMeasure,
  AtomAtZero,
  NonMonotoneS,
  VarianceNotNormalized,
  QRBreakdown,
  SolverFailure,
  SingularInverseFactor,
  Validation,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::InversionOfAtomAtZero: return "InversionOfAtomAtZero";
    case ErrorCode::PointOnSupport: return "PointOnSupport";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DeltaZeroMeasure: return "DeltaZeroMeasure";
    case ErrorCode::AtomAtZero: return "AtomAtZero";
    case ErrorCode::NonMonotoneS: return "NonMonotoneS";
    case ErrorCode::VarianceNotNormalized: return "VarianceNotNormalized";
    case ErrorCode::QRBreakdown: return "QRBreakdown";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::SingularInverseFactor: return "SingularInverseFactor";
    case ErrorCode::Validation: return "Validation";
  }
  return "Unknown";
}

/// Input errors are caller mistakes (bad measure, argument off the domain);
/// everything else is a numerical failure.
constexpr bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMeasure:
    case ErrorCode::InversionOfAtomAtZero:
    case ErrorCode::PointOnSupport:
    case ErrorCode::OutOfDomain:
    case ErrorCode::DeltaZeroMeasure:
    case ErrorCode::AtomAtZero:
    case ErrorCode::VarianceNotNormalized:
    case ErrorCode::Validation:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace freebrown
