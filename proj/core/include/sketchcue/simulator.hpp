#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/calibration.hpp"
#include "sketchcue/geometry.hpp"
#include "sketchcue/sensing.hpp"

namespace sketchcue {

inline constexpr double kDefaultDeskDepthMm = 800.0;
inline constexpr double kDefaultNoiseSigmaMm = 2.0;
inline constexpr std::uint16_t kIrBackground = 1000;
inline constexpr std::uint16_t kIrMarker = 65000;

struct SceneObject {
  OrientedRect footprint;  // workspace mm
  double height_mm = 0.0;
};

struct Scene {
  double desk_depth_mm = kDefaultDeskDepthMm;
  std::vector<SceneObject> objects;
  std::optional<Point2> marker;  // workspace mm
};

// Synthetic rig: a mildly keystoned depth camera and a 1280x720 projector
// over the 572 x 321 mm desk, fitted from corner pins like a real session.
CalibrationProfile default_rig();

// Orthographic depth image of the scene with seeded Gaussian noise.
DepthFrame render_depth(const Scene& scene, const CalibrationProfile& profile,
                        double noise_sigma_mm = kDefaultNoiseSigmaMm, std::uint64_t seed = 0,
                        std::uint64_t timestamp_us = 0);

// Dark frame with a bright radius-2.5 px disc at the marker's camera position.
IRFrame render_ir(const Scene& scene, const CalibrationProfile& profile);

void to_json(nlohmann::json& j, const SceneObject& o);
void from_json(const nlohmann::json& j, SceneObject& o);

}  // namespace sketchcue
