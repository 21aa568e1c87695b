#include "sketchcue/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

namespace sketchcue {

CalibrationProfile default_rig() {
  const std::array<Point2, 4> ws{{{0, 0}, {572, 0}, {0, 321}, {572, 321}}};
  const std::array<Point2, 4> cam{{{24, 40}, {490, 34}, {30, 398}, {484, 392}}};
  const std::array<Point2, 4> proj{{{10, 0}, {1270, 6}, {0, 719}, {1279, 712}}};
  std::vector<Correspondence> proj_cam, ws_cam;
  for (std::size_t i = 0; i < 4; ++i) {
    proj_cam.push_back({proj[i], cam[i]});
    ws_cam.push_back({ws[i], cam[i]});
  }
  return calibrate(proj_cam, ws_cam, kDepthCameraDims, {1280, 720}, kWorkspaceDims);
}

DepthFrame render_depth(const Scene& scene, const CalibrationProfile& profile, double noise_sigma_mm,
                        std::uint64_t seed, std::uint64_t timestamp_us) {
  const int w = profile.cam_dims.w, h = profile.cam_dims.h;
  Image<float> lift(w, h, 0.0f);
  const Homography ws_from_cam = profile.workspace_from_cam();
  for (const auto& obj : scene.objects) {
    const auto corners = obj.footprint.corners();
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : corners) {
      const Point2 p = profile.cam_from_workspace.apply(c);
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(xmin)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(xmax)));
    const int y0 = std::max(0, static_cast<int>(std::floor(ymin)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(ymax)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (obj.footprint.contains(ws_from_cam.apply({static_cast<double>(x), static_cast<double>(y)})))
          lift.at(x, y) = std::max(lift.at(x, y), static_cast<float>(obj.height_mm));
  }

  DepthFrame frame{Image<std::uint16_t>(w, h), timestamp_us};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma_mm > 0 ? noise_sigma_mm : 1.0);
  for (std::size_t i = 0; i < frame.depth_mm.size(); ++i) {
    double d = scene.desk_depth_mm - lift[i];
    if (noise_sigma_mm > 0) d += noise(rng);
    frame.depth_mm[i] = static_cast<std::uint16_t>(std::clamp(std::nearbyint(d), 0.0, 65535.0));
  }
  return frame;
}

IRFrame render_ir(const Scene& scene, const CalibrationProfile& profile) {
  IRFrame frame{Image<std::uint16_t>(profile.cam_dims.w, profile.cam_dims.h, kIrBackground), 0};
  if (!scene.marker) return frame;
  const Point2 m = profile.cam_from_workspace.apply(*scene.marker);
  constexpr double r = 2.5;
  const int w = frame.intensity.width(), h = frame.intensity.height();
  if (!finite(m) || m.x < -r || m.y < -r || m.x > w + r || m.y > h + r) return frame;
  for (int y = std::max(0, static_cast<int>(std::floor(m.y - r))); y <= std::min(h - 1, static_cast<int>(std::ceil(m.y + r))); ++y)
    for (int x = std::max(0, static_cast<int>(std::floor(m.x - r))); x <= std::min(w - 1, static_cast<int>(std::ceil(m.x + r))); ++x)
      if (distance({static_cast<double>(x), static_cast<double>(y)}, m) <= r)
        frame.intensity.at(x, y) = kIrMarker;
  return frame;
}

void to_json(nlohmann::json& j, const SceneObject& o) {
  const auto& f = o.footprint;
  j = nlohmann::json{{"rect",
                      {{"x", f.pose.center.x}, {"y", f.pose.center.y}, {"theta", f.pose.theta}, {"w", f.width},
                       {"t", f.thickness}}},
                     {"height", o.height_mm}};
}

void from_json(const nlohmann::json& j, SceneObject& o) {
  const auto& r = j.at("rect");
  SceneObject out{{{{r.at("x").get<double>(), r.at("y").get<double>()}, r.value("theta", 0.0)},
                   r.at("w").get<double>(),
                   r.at("t").get<double>()},
                  j.at("height").get<double>()};
  if (!(out.footprint.width > 0) || !(out.footprint.thickness > 0) || !(out.height_mm > 0) ||
      !finite(out.footprint.pose.center))
    throw Error(Errc::MalformedScript, "scene object needs positive w, t and height");
  o = out;
}

}  // namespace sketchcue
