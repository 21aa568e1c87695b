#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/geometry.hpp"
#include "sketchcue/raster.hpp"

namespace sketchcue {

struct Size2i {
  int w = 0;
  int h = 0;
  friend bool operator==(const Size2i&, const Size2i&) = default;
};

struct Size2d {
  double w = 0.0;
  double h = 0.0;
  friend bool operator==(const Size2d&, const Size2d&) = default;
};

inline constexpr Size2i kDepthCameraDims{512, 424};
inline constexpr Size2d kWorkspaceDims{572.0, 321.0};
inline constexpr double kMaxCalibrationResidualPx = 2.0;

// Links the three frames: workspace mm -> depth camera px -> projector px.
struct CalibrationProfile {
  Homography cam_from_workspace;
  Homography proj_from_cam;
  Size2i cam_dims = kDepthCameraDims;
  Size2i proj_dims{1280, 720};
  Size2d workspace_dims = kWorkspaceDims;
  double rms_residual = 0.0;

  Homography proj_from_workspace() const { return proj_from_cam * cam_from_workspace; }
  Homography workspace_from_cam() const { return cam_from_workspace.inverse(); }

  // Approximate camera pixels per workspace mm (square root of the local
  // area scale at the workspace center).
  double cam_px_per_mm() const;
};

// Fits both maps from pin correspondences; src is the first element of each
// pair. Rejects the calibration when the larger fit RMS exceeds 2 px.
CalibrationProfile calibrate(std::span<const Correspondence> pins_proj_cam,
                             std::span<const Correspondence> pins_workspace_cam, Size2i cam_dims,
                             Size2i proj_dims, Size2d workspace_dims);

Point2 workspace_to_camera(const CalibrationProfile& profile, Point2 mm);
Point2 camera_to_workspace(const CalibrationProfile& profile, Point2 px);
Point2 workspace_to_projector(const CalibrationProfile& profile, Point2 mm);
Point2 projector_to_workspace(const CalibrationProfile& profile, Point2 px);

struct IRFrame {
  Image<std::uint16_t> intensity;
  std::uint64_t timestamp_us = 0;
};

inline constexpr std::uint16_t kDefaultMarkerThreshold = 60000;

// Intensity-weighted centroid (camera px) of the largest bright blob, or
// nothing when no blob of at least 4 px exists.
std::optional<Point2> detect_marker(const IRFrame& frame,
                                    std::uint16_t min_intensity = kDefaultMarkerThreshold);

void to_json(nlohmann::json& j, const CalibrationProfile& p);
void from_json(const nlohmann::json& j, CalibrationProfile& p);

}  // namespace sketchcue
