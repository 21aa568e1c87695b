#include "sketchcue/sensing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

namespace sketchcue {

EnvironmentMap capture_environment(std::span<const DepthFrame> frames) {
  if (frames.empty()) throw Error(Errc::EmptyInput, "environment capture needs at least one frame");
  const int w = frames.front().width(), h = frames.front().height();
  for (const auto& f : frames)
    if (f.width() != w || f.height() != h) throw Error(Errc::DimMismatch, "environment frames differ in size");

  EnvironmentMap env{Image<float>(w, h, 0.0f), Mask(w, h, 0)};
  std::vector<std::uint16_t> samples;
  samples.reserve(frames.size());
  for (std::size_t i = 0; i < env.valid.size(); ++i) {
    samples.clear();
    for (const auto& f : frames)
      if (f.depth_mm[i] != 0) samples.push_back(f.depth_mm[i]);
    if (samples.empty() || 2 * samples.size() < frames.size()) continue;
    std::sort(samples.begin(), samples.end());
    const std::size_t m = samples.size() / 2;
    const float median = samples.size() % 2 ? static_cast<float>(samples[m])
                                            : (static_cast<float>(samples[m - 1]) + static_cast<float>(samples[m])) / 2;
    env.baseline_mm[i] = median;
    env.valid[i] = 1;
  }
  return env;
}

OccupancyMask occupancy_mask(const EnvironmentMap& env, const DepthFrame& frame, double threshold_mm) {
  if (!env.baseline_mm.same_dims(frame.depth_mm) || !env.valid.same_dims(frame.depth_mm))
    throw Error(Errc::DimMismatch, "depth frame and environment map differ in size");
  OccupancyMask out(frame.width(), frame.height(), 0);
  const auto* base = env.baseline_mm.data().data();
  const auto* valid = env.valid.data().data();
  const auto* depth = frame.depth_mm.data().data();
  auto* bits = out.data().data();
  for (std::size_t i = 0, n = out.size(); i < n; ++i) {
    const std::uint16_t d = depth[i];
    bits[i] = valid[i] && d != 0 && (static_cast<double>(base[i]) - d) > threshold_mm;
  }
  return out;
}

namespace {

// Separable min (erode) or max (dilate) over a (2r+1)^2 window clipped to the raster.
template <bool Erode>
Mask morph(const Mask& in, int r) {
  const int w = in.width(), h = in.height();
  Mask tmp(w, h), out(w, h);
  auto pick = [](std::uint8_t acc, std::uint8_t v) {
    if constexpr (Erode) return std::min(acc, v);
    else return std::max(acc, v);
  };
  const std::uint8_t init = Erode ? 1 : 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t acc = init;
      for (int k = std::max(0, x - r); k <= std::min(w - 1, x + r); ++k) acc = pick(acc, in.at(k, y));
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t acc = init;
      for (int k = std::max(0, y - r); k <= std::min(h - 1, y + r); ++k) acc = pick(acc, tmp.at(x, k));
      out.at(x, y) = acc;
    }
  return out;
}

}  // namespace

OccupancyMask denoise_mask(const OccupancyMask& mask, int radius) {
  if (radius < 0) throw Error(Errc::MalformedInput, "denoise radius must be non-negative");
  if (radius == 0) return mask;
  return morph<false>(morph<true>(mask, radius), radius);
}

std::vector<DetectedBlock> detect_blocks(const OccupancyMask& mask, const CalibrationProfile& profile,
                                         double footprint_mm2, double tolerance, const EnvironmentMap* env,
                                         const DepthFrame* frame) {
  std::vector<DetectedBlock> out;
  const auto comps = label_components(mask);
  if (comps.areas.empty()) return out;

  struct Accum {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, lift = 0, lift_n = 0;
  };
  std::vector<Accum> acc(comps.areas.size());
  const Homography ws_from_cam = profile.workspace_from_cam();
  const bool with_depth = env && frame && env->valid.same_dims(mask) && frame->depth_mm.same_dims(mask);
  const auto w = static_cast<std::size_t>(mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const auto l = comps.labels[i];
    if (l == 0) continue;
    auto& a = acc[static_cast<std::size_t>(l - 1)];
    const Point2 p = ws_from_cam.apply({static_cast<double>(i % w), static_cast<double>(i / w)});
    a.n += 1;
    a.sx += p.x;
    a.sy += p.y;
    a.sxx += p.x * p.x;
    a.syy += p.y * p.y;
    a.sxy += p.x * p.y;
    if (with_depth && env->valid[i] && frame->depth_mm[i] != 0) {
      a.lift += static_cast<double>(env->baseline_mm[i]) - frame->depth_mm[i];
      a.lift_n += 1;
    }
  }

  for (std::size_t k = 0; k < acc.size(); ++k) {
    const auto& a = acc[k];
    const Point2 c{a.sx / a.n, a.sy / a.n};
    // Local camera px per mm^2 at the centroid.
    const Point2 o = profile.cam_from_workspace.apply(c);
    const double px_per_mm2 = std::abs(cross(profile.cam_from_workspace.apply(c + Point2{1, 0}) - o,
                                             profile.cam_from_workspace.apply(c + Point2{0, 1}) - o));
    const double area_mm2 = a.n / px_per_mm2;
    if (area_mm2 < (1 - tolerance) * footprint_mm2 || area_mm2 > (1 + tolerance) * footprint_mm2) continue;

    const double mu20 = a.sxx / a.n - c.x * c.x;
    const double mu02 = a.syy / a.n - c.y * c.y;
    const double mu11 = a.sxy / a.n - c.x * c.y;
    const double long_axis = 0.5 * std::atan2(2 * mu11, mu20 - mu02);
    // Heading is the short axis, folded into [-pi/2, pi/2).
    double theta = normalize_angle(long_axis + std::numbers::pi / 2);
    if (theta >= std::numbers::pi / 2) theta -= std::numbers::pi;
    if (theta < -std::numbers::pi / 2) theta += std::numbers::pi;

    out.push_back({{c, theta}, comps.areas[k], a.lift_n > 0 ? a.lift / a.lift_n : 0.0});
  }
  return out;
}

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> encode_frame(const char (&magic)[5], const Image<std::uint16_t>& img, std::uint64_t ts) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 2 * img.size());
  out.insert(out.end(), magic, magic + 4);
  put_le(out, static_cast<std::uint32_t>(img.width()), 4);
  put_le(out, static_cast<std::uint32_t>(img.height()), 4);
  put_le(out, ts, 8);
  for (std::uint16_t v : img.data()) put_le(out, v, 2);
  return out;
}

Image<std::uint16_t> decode_frame(const char (&magic)[5], std::span<const std::uint8_t> in, std::uint64_t& ts) {
  if (in.size() < kHeaderBytes || std::memcmp(in.data(), magic, 4) != 0)
    throw Error(Errc::MalformedInput, std::string("frame does not start with ") + magic);
  const auto w = get_le(in, 4, 4), h = get_le(in, 8, 4);
  ts = get_le(in, 12, 8);
  if (w == 0 || h == 0 || w > 16384 || h > 16384) throw Error(Errc::MalformedInput, "frame dimensions out of range");
  if (in.size() != kHeaderBytes + 2 * w * h) throw Error(Errc::MalformedInput, "frame payload size mismatch");
  Image<std::uint16_t> img(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<std::uint16_t>(get_le(in, kHeaderBytes + 2 * i, 2));
  return img;
}

}  // namespace

std::vector<std::uint8_t> encode_depth_frame(const DepthFrame& frame) {
  return encode_frame("SMHD", frame.depth_mm, frame.timestamp_us);
}

DepthFrame decode_depth_frame(std::span<const std::uint8_t> bytes) {
  DepthFrame f;
  f.depth_mm = decode_frame("SMHD", bytes, f.timestamp_us);
  return f;
}

std::vector<std::uint8_t> encode_ir_frame(const IRFrame& frame) {
  return encode_frame("SMHI", frame.intensity, frame.timestamp_us);
}

IRFrame decode_ir_frame(std::span<const std::uint8_t> bytes) {
  IRFrame f;
  f.intensity = decode_frame("SMHI", bytes, f.timestamp_us);
  return f;
}

}  // namespace sketchcue
