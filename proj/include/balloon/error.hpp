#pragma once

#include <stdexcept>
#include <string>

namespace balloon {

enum class ErrorCode {
  // volume / MetaImage
  UnsupportedElementType,
  CompressedData,
  UnsupportedDimensionality,
  MalformedHeader,
  MissingPayload,
  ShortPayload,
  Io,
  GridMismatch,
  // initializer
  InvalidContour,
  DegenerateContour,
  ContourTooSmall,
  // mesh
  SplitDidNotConverge,
  MeshNotWatertight,
  // inflation
  InvalidParams,
  SeedOutsideIntensityRange,
  // evaluation
  UndefinedDsc,
  // phantom
  InvalidPhantomSpec,
};

/// Every failure the library reports carries one of the codes above so the
/// CLI and service can map it to an exit code or HTTP status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace balloon
