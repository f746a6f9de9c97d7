#pragma once

#include <stdexcept>
#include <string>

namespace bogovskii {

enum class ErrorCode {
  InvalidArgument,
  InvalidDomain,
  SingularPoint,
  MeanNotZero,
  SupportViolation,
  ExtrapolationDiverged,
  NonZeroMeanPsi,
  PaddingRequired,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::MeanNotZero: return "MeanNotZero";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::ExtrapolationDiverged: return "ExtrapolationDiverged";
    case ErrorCode::NonZeroMeanPsi: return "NonZeroMeanPsi";
    case ErrorCode::PaddingRequired: return "PaddingRequired";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bogovskii
