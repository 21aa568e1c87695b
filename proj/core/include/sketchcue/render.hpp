#pragma once

#include <vector>

#include "sketchcue/bento.hpp"
#include "sketchcue/calibration.hpp"
#include "sketchcue/domino.hpp"
#include "sketchcue/raster.hpp"
#include "sketchcue/sensing.hpp"

namespace sketchcue {

// Projector-space RGBA overlay; alpha 0 is unlit.
using GuidanceImage = RgbaImage;

namespace colors {
inline constexpr Rgba kTransparent{0, 0, 0, 0};
inline constexpr Rgba kBlack{0, 0, 0, 255};
inline constexpr Rgba kWhite{255, 255, 255, 255};
inline constexpr Rgba kGreen{0, 255, 0, 255};
inline constexpr Rgba kRed{255, 0, 0, 255};
}  // namespace colors

struct RenderOptions {
  // Shapes are rasterized on a camera-frame grid this many times finer than
  // the depth camera before the single warp to projector space.
  int supersample = 2;
  double outline_px = 2.0;  // camera px
};

// Maps supersampled camera-grid pixels to camera px.
Homography camera_from_supersampled(int factor);

// White target outlines, feedback-colored circles on matched detections,
// red circles on unmatched ones. Returns the camera-grid raster; see
// render_domino_overlay for the projector image.
RgbaImage render_domino_camera(const DominoPlan& plan, const Assignment& assignment,
                               const std::vector<DetectedBlock>& detections, const CalibrationProfile& profile,
                               const RenderOptions& options = {});

GuidanceImage render_domino_overlay(const DominoPlan& plan, const Assignment& assignment,
                                    const std::vector<DetectedBlock>& detections, const CalibrationProfile& profile,
                                    const RenderOptions& options = {});

// Camera-px raster of the bento guidance colors.
RgbaImage render_bento_camera(const BentoPlan& plan, const BentoState& state, const OccupancyMask& occupancy);

GuidanceImage render_bento_overlay(const BentoPlan& plan, const BentoState& state, const OccupancyMask& occupancy,
                                   const CalibrationProfile& profile);

}  // namespace sketchcue
