#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sketchcue {

enum class Errc {
  TooFewPoints,
  DegenerateConfiguration,
  PointAtInfinity,
  StrokeTooShort,
  ResultDegenerate,
  NoRegions,
  CalibrationRejected,
  EmptyInput,
  DimMismatch,
  InfeasibleStroke,
  MaskOutsideBox,
  EmptyTarget,
  EmptyNonTarget,
  MalformedScript,
  MalformedInput,
  InvalidConfig,
  InvalidState,
  NotPlanned,
  NotFound,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported through this type; the code is the
// stable identifier surfaced by the CLI and the HTTP API.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sketchcue
