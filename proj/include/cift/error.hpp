#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cift {

enum class ErrorCode {
  MalformedHeader,
  DimensionMismatch,
  NonFiniteValue,
  InvalidShape,
  IoError,
  InvalidManifest,
  DegenerateCovariance,
  InsufficientData,
  NonPsdInput,
  EmptyPool,
  ZeroSigma,
  TooFewPoints,
  MissingBaseline,
  MissingRatio,
  InvalidRatio,
  InvalidPlan,
  InvalidTable,
  OverlappingSupports,
  ShapeMismatch,
  ZeroGradient,
  SignViolation,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cift
