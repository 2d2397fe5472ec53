#pragma once

#include <stdexcept>
#include <string>

namespace quasiwarp {

enum class ErrorCode {
  DegeneratePoint,
  SingularHomography,
  AffineDegenerate,
  NonMonotoneScale,
  ParallelConstraintLines,
  NoAdmissibleRoot,
  OutsideImage,
  DegenerateConfiguration,
  IllConditioned,
  NoConsensus,
  ConstraintInfeasible,
  TooFewFeatures,
  NoOverlap,
  EmptySeam,
  UnboundedWarp,
  ChainBreak,
  PartitionInsideOverlap,
  LabelGap,
  InvalidArgument,
  IoError,
  Internal,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::AffineDegenerate: return "AffineDegenerate";
    case ErrorCode::NonMonotoneScale: return "NonMonotoneScale";
    case ErrorCode::ParallelConstraintLines: return "ParallelConstraintLines";
    case ErrorCode::NoAdmissibleRoot: return "NoAdmissibleRoot";
    case ErrorCode::OutsideImage: return "OutsideImage";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::ConstraintInfeasible: return "ConstraintInfeasible";
    case ErrorCode::TooFewFeatures: return "TooFewFeatures";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::EmptySeam: return "EmptySeam";
    case ErrorCode::UnboundedWarp: return "UnboundedWarp";
    case ErrorCode::ChainBreak: return "ChainBreak";
    case ErrorCode::PartitionInsideOverlap: return "PartitionInsideOverlap";
    case ErrorCode::LabelGap: return "LabelGap";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

/// Error categories map onto process exit codes: input -> 2, geometry -> 3, internal -> 4.
enum class ErrorCategory { Input, Geometry, Internal };

inline ErrorCategory error_category(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::IoError:
      return ErrorCategory::Input;
    case ErrorCode::LabelGap:
    case ErrorCode::Internal:
      return ErrorCategory::Internal;
    default:
      return ErrorCategory::Geometry;
  }
}

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Geometry: return "geometry";
    case ErrorCategory::Internal: return "internal";
  }
  return "internal";
}

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Geometry: return 3;
    case ErrorCategory::Internal: return 4;
  }
  return 4;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return error_category(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace quasiwarp
