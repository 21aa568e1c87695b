#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/calibration.hpp"

namespace sketchcue {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// {proj_cam:[{proj:[x,y], cam:[x,y]}, ...], workspace_cam:[{ws:[x,y], cam:[x,y]}, ...],
//  cam?:{w,h}, proj?:{w,h}, workspace_mm?:{w,h}}
CalibrationProfile calibrate_from_pins(const nlohmann::json& pins);

// args excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sketchcue
