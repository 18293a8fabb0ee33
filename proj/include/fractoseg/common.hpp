#pragma once

#include <stdexcept>
#include <string>

namespace fractoseg {

enum class ErrorCode {
  UnknownLabel,
  DegeneratePolygon,
  InsufficientLabeled,
  BadFractions,
  DivisionByZero,
  EmptyImage,
  NonFiniteResult,
  EmptySelection,
  MissingScore,
  ShapeMismatch,
  SpatialSpecInStrong,
  UnknownStrategy,
  TooSmall,
  GridMismatch,
  NonFinite,
  EmptyDataset,
  DivergedLoss,
  NoCrackPixels,
  DegenerateWidth,
  FrontNotFound,
  EmptyInput,
  InvalidSpec,
  InvalidProfile,
  ConfigInvalid,
  PathMissing,
  IoFailure,
};

const char* error_code_name(ErrorCode code);

/// All recoverable failures are reported through this exception; `code()`
/// identifies the failure class so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace fractoseg
