#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riesz {

/// Failure categories shared by every module. The CLI maps these onto exit codes.
enum class ErrorKind {
  NonMonotoneSpectrum,
  GapBoundViolated,
  TailModelMissing,
  NotReached,
  OnSpectrum,
  BoxSearchFailed,
  HorizonTooLarge,
  BadModel,
  OutOfDomain,
  QuadratureUnderflow,
  UnsupportedPotential,
  SingularShift,
  FactorizationInvalid,
  ContourHitsEigenvalue,
  TrustExhausted,
  Overflow,
  QuadratureFailure,
  InsufficientPoints,
  ConfigError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonMonotoneSpectrum: return "NonMonotoneSpectrum";
    case ErrorKind::GapBoundViolated: return "GapBoundViolated";
    case ErrorKind::TailModelMissing: return "TailModelMissing";
    case ErrorKind::NotReached: return "NotReached";
    case ErrorKind::OnSpectrum: return "OnSpectrum";
    case ErrorKind::BoxSearchFailed: return "BoxSearchFailed";
    case ErrorKind::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorKind::BadModel: return "BadModel";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::QuadratureUnderflow: return "QuadratureUnderflow";
    case ErrorKind::UnsupportedPotential: return "UnsupportedPotential";
    case ErrorKind::SingularShift: return "SingularShift";
    case ErrorKind::FactorizationInvalid: return "FactorizationInvalid";
    case ErrorKind::ContourHitsEigenvalue: return "ContourHitsEigenvalue";
    case ErrorKind::TrustExhausted: return "TrustExhausted";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace riesz
