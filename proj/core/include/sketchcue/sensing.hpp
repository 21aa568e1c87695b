#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sketchcue/calibration.hpp"
#include "sketchcue/geometry.hpp"
#include "sketchcue/raster.hpp"

namespace sketchcue {

inline constexpr double kDepthThresholdMm = 8.0;
inline constexpr std::uint16_t kMinPlausibleDepthMm = 200;
inline constexpr std::uint16_t kMaxPlausibleDepthMm = 8000;

// Depth in mm per pixel; 0 marks a dropout.
struct DepthFrame {
  Image<std::uint16_t> depth_mm;
  std::uint64_t timestamp_us = 0;

  int width() const { return depth_mm.width(); }
  int height() const { return depth_mm.height(); }
};

struct EnvironmentMap {
  Image<float> baseline_mm;
  Mask valid;
};

using OccupancyMask = Mask;

struct DetectedBlock {
  Pose2 pose;  // workspace mm; theta in [-pi/2, pi/2)
  std::size_t area_px = 0;
  double height_mm = 0.0;
};

// Per-pixel median of the nonzero samples. A pixel is valid when it is
// nonzero in at least half of the frames.
EnvironmentMap capture_environment(std::span<const DepthFrame> frames);

// Set where (baseline - depth) > threshold, on valid nonzero pixels only.
OccupancyMask occupancy_mask(const EnvironmentMap& env, const DepthFrame& frame,
                             double threshold_mm = kDepthThresholdMm);

// Morphological opening with a (2r+1)^2 square; the window is truncated at
// the raster border.
OccupancyMask denoise_mask(const OccupancyMask& mask, int radius = 1);

// Blobs whose workspace area is within (1 +- tolerance) * footprint_mm2.
std::vector<DetectedBlock> detect_blocks(const OccupancyMask& mask, const CalibrationProfile& profile,
                                         double footprint_mm2, double tolerance = 0.5,
                                         const EnvironmentMap* env = nullptr,
                                         const DepthFrame* frame = nullptr);

// Binary frame files: 4-byte magic ("SMHD" depth, "SMHI" infrared), u32 width,
// u32 height, u64 timestamp_us, then width*height u16 values; all little-endian.
std::vector<std::uint8_t> encode_depth_frame(const DepthFrame& frame);
DepthFrame decode_depth_frame(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ir_frame(const IRFrame& frame);
IRFrame decode_ir_frame(std::span<const std::uint8_t> bytes);

}  // namespace sketchcue
