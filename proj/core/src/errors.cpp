#include "sketchcue/errors.hpp"

namespace sketchcue {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::PointAtInfinity: return "PointAtInfinity";
    case Errc::StrokeTooShort: return "StrokeTooShort";
    case Errc::ResultDegenerate: return "ResultDegenerate";
    case Errc::NoRegions: return "NoRegions";
    case Errc::CalibrationRejected: return "CalibrationRejected";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::InfeasibleStroke: return "InfeasibleStroke";
    case Errc::MaskOutsideBox: return "MaskOutsideBox";
    case Errc::EmptyTarget: return "EmptyTarget";
    case Errc::EmptyNonTarget: return "EmptyNonTarget";
    case Errc::MalformedScript: return "MalformedScript";
    case Errc::MalformedInput: return "MalformedInput";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidState: return "InvalidState";
    case Errc::NotPlanned: return "NotPlanned";
    case Errc::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace sketchcue
