#include "sketchcue/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace sketchcue {

double CalibrationProfile::cam_px_per_mm() const {
  const Point2 c{workspace_dims.w / 2, workspace_dims.h / 2};
  const Point2 o = cam_from_workspace.apply(c);
  const Point2 ex = cam_from_workspace.apply(c + Point2{1, 0}) - o;
  const Point2 ey = cam_from_workspace.apply(c + Point2{0, 1}) - o;
  return std::sqrt(std::abs(cross(ex, ey)));
}

CalibrationProfile calibrate(std::span<const Correspondence> pins_proj_cam,
                             std::span<const Correspondence> pins_workspace_cam, Size2i cam_dims,
                             Size2i proj_dims, Size2d workspace_dims) {
  if (cam_dims.w <= 0 || cam_dims.h <= 0 || proj_dims.w <= 0 || proj_dims.h <= 0 ||
      !(workspace_dims.w > 0) || !(workspace_dims.h > 0))
    throw Error(Errc::MalformedInput, "calibration frame dimensions must be positive");

  // Pins are recorded as (projector, camera) and (workspace, camera); the
  // profile stores camera-from-workspace and projector-from-camera.
  std::vector<Correspondence> cam_to_proj, ws_to_cam;
  for (const auto& c : pins_proj_cam) cam_to_proj.push_back({c.dst, c.src});
  for (const auto& c : pins_workspace_cam) ws_to_cam.push_back({c.src, c.dst});

  const HomographyFit cam_fit = homography_from_correspondences(ws_to_cam);
  const HomographyFit proj_fit = homography_from_correspondences(cam_to_proj);
  CalibrationProfile p;
  p.cam_from_workspace = cam_fit.h;
  p.proj_from_cam = proj_fit.h;
  p.cam_dims = cam_dims;
  p.proj_dims = proj_dims;
  p.workspace_dims = workspace_dims;
  p.rms_residual = std::max(cam_fit.rms, proj_fit.rms);
  if (p.rms_residual > kMaxCalibrationResidualPx)
    throw Error(Errc::CalibrationRejected,
                "calibration residual " + std::to_string(p.rms_residual) + " px exceeds 2 px");
  return p;
}

Point2 workspace_to_camera(const CalibrationProfile& profile, Point2 mm) {
  return profile.cam_from_workspace.apply(mm);
}

Point2 camera_to_workspace(const CalibrationProfile& profile, Point2 px) {
  return profile.cam_from_workspace.inverse().apply(px);
}

Point2 workspace_to_projector(const CalibrationProfile& profile, Point2 mm) {
  return profile.proj_from_cam.apply(profile.cam_from_workspace.apply(mm));
}

Point2 projector_to_workspace(const CalibrationProfile& profile, Point2 px) {
  return profile.cam_from_workspace.inverse().apply(profile.proj_from_cam.inverse().apply(px));
}

std::optional<Point2> detect_marker(const IRFrame& frame, std::uint16_t min_intensity) {
  const auto& img = frame.intensity;
  const auto comps = label_components(
      img.width(), img.height(), [&](std::size_t i) { return img[i] >= min_intensity; },
      [](std::size_t, std::size_t) { return true; });
  if (comps.areas.empty()) return std::nullopt;
  const auto largest = std::max_element(comps.areas.begin(), comps.areas.end());
  if (*largest < 4) return std::nullopt;
  const auto label = static_cast<std::int32_t>(largest - comps.areas.begin() + 1);

  double sw = 0, sx = 0, sy = 0;
  const auto w = static_cast<std::size_t>(img.width());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (comps.labels[i] != label) continue;
    const double v = img[i];
    sw += v;
    sx += v * static_cast<double>(i % w);
    sy += v * static_cast<double>(i / w);
  }
  return Point2{sx / sw, sy / sw};
}

void to_json(nlohmann::json& j, const CalibrationProfile& p) {
  j = nlohmann::json{{"cam_from_workspace", p.cam_from_workspace},
                     {"proj_from_cam", p.proj_from_cam},
                     {"cam", {{"w", p.cam_dims.w}, {"h", p.cam_dims.h}}},
                     {"proj", {{"w", p.proj_dims.w}, {"h", p.proj_dims.h}}},
                     {"workspace_mm", {{"w", p.workspace_dims.w}, {"h", p.workspace_dims.h}}},
                     {"rms", p.rms_residual}};
}

void from_json(const nlohmann::json& j, CalibrationProfile& p) {
  try {
    CalibrationProfile out;
    out.cam_from_workspace = j.at("cam_from_workspace").get<Homography>();
    out.proj_from_cam = j.at("proj_from_cam").get<Homography>();
    out.cam_dims = {j.at("cam").at("w").get<int>(), j.at("cam").at("h").get<int>()};
    out.proj_dims = {j.at("proj").at("w").get<int>(), j.at("proj").at("h").get<int>()};
    out.workspace_dims = {j.at("workspace_mm").at("w").get<double>(), j.at("workspace_mm").at("h").get<double>()};
    out.rms_residual = j.value("rms", 0.0);
    if (out.cam_dims.w <= 0 || out.cam_dims.h <= 0 || out.proj_dims.w <= 0 || out.proj_dims.h <= 0 ||
        !(out.workspace_dims.w > 0) || !(out.workspace_dims.h > 0) || out.rms_residual < 0)
      throw Error(Errc::MalformedInput, "calibration dimensions must be positive");
    p = out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("calibration: ") + e.what());
  }
}

}  // namespace sketchcue
