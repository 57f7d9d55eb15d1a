#include "cift/error.hpp"

namespace cift {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPsdInput: return "NonPsdInput";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::ZeroSigma: return "ZeroSigma";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::MissingRatio: return "MissingRatio";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::OverlappingSupports: return "OverlappingSupports";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::SignViolation: return "SignViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace cift
