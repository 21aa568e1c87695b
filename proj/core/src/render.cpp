#include "sketchcue/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sketchcue {

Homography camera_from_supersampled(int factor) {
  if (factor < 1) throw Error(Errc::MalformedInput, "supersample factor must be >= 1");
  const double s = 1.0 / factor;
  const double offset = 0.5 * s - 0.5;
  return Homography({s, 0, offset, 0, s, offset, 0, 0, 1});
}

namespace {

struct PixelBox {
  int x0, y0, x1, y1;
};

PixelBox clip_box(const std::vector<Point2>& pts, double margin, int w, int h) {
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return {std::max(0, static_cast<int>(std::floor(xmin - margin))), std::max(0, static_cast<int>(std::floor(ymin - margin))),
          std::min(w - 1, static_cast<int>(std::ceil(xmax + margin))),
          std::min(h - 1, static_cast<int>(std::ceil(ymax + margin)))};
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

bool inside_convex(const std::array<Point2, 4>& q, Point2 p) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = cross(q[(i + 1) % 4] - q[i], p - q[i]);
    pos |= c > 0;
    neg |= c < 0;
  }
  return !(pos && neg);
}

void draw_outline(RgbaImage& img, const std::array<Point2, 4>& quad, double stroke, Rgba color) {
  const auto box = clip_box({quad.begin(), quad.end()}, 1.0, img.width(), img.height());
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      if (!inside_convex(quad, p)) continue;
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < 4; ++i) d = std::min(d, segment_distance(p, quad[i], quad[(i + 1) % 4]));
      if (d < stroke) img.at(x, y) = color;
    }
}

// Filled workspace disc, tested per pixel in workspace mm.
void draw_disc(RgbaImage& img, const Homography& grid_from_ws, const Homography& ws_from_grid, Point2 center,
               double radius_mm, Rgba color) {
  std::vector<Point2> rim;
  for (int k = 0; k < 8; ++k) rim.push_back(grid_from_ws.apply(center + radius_mm * direction(k * std::numbers::pi / 4)));
  const auto box = clip_box(rim, 2.0, img.width(), img.height());
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x)
      if (distance(ws_from_grid.apply({static_cast<double>(x), static_cast<double>(y)}), center) <= radius_mm)
        img.at(x, y) = color;
}

}  // namespace

RgbaImage render_domino_camera(const DominoPlan& plan, const Assignment& assignment,
                               const std::vector<DetectedBlock>& detections, const CalibrationProfile& profile,
                               const RenderOptions& options) {
  const int k = options.supersample;
  RgbaImage img(profile.cam_dims.w * k, profile.cam_dims.h * k, colors::kTransparent);
  const Homography grid_from_ws = camera_from_supersampled(k).inverse() * profile.cam_from_workspace;
  const Homography ws_from_grid = grid_from_ws.inverse();

  for (std::size_t i = 0; i < plan.targets.size(); ++i) {
    const auto corners = plan.footprint(i).corners();
    std::array<Point2, 4> quad;
    for (std::size_t c = 0; c < 4; ++c) quad[c] = grid_from_ws.apply(corners[c]);
    draw_outline(img, quad, options.outline_px * k, colors::kWhite);
  }

  const double radius = plan.params.width / 2;
  for (const auto& m : assignment.pairs)
    draw_disc(img, grid_from_ws, ws_from_grid, detections[m.detection].pose.center, radius,
              opaque(feedback_color(m.distance, plan.params)));
  for (std::size_t j : assignment.unmatched_detections)
    draw_disc(img, grid_from_ws, ws_from_grid, detections[j].pose.center, radius, colors::kRed);
  return img;
}

GuidanceImage render_domino_overlay(const DominoPlan& plan, const Assignment& assignment,
                                    const std::vector<DetectedBlock>& detections, const CalibrationProfile& profile,
                                    const RenderOptions& options) {
  const RgbaImage cam = render_domino_camera(plan, assignment, detections, profile, options);
  return warp_image(cam, profile.proj_from_cam * camera_from_supersampled(options.supersample), profile.proj_dims.w,
                    profile.proj_dims.h);
}

RgbaImage render_bento_camera(const BentoPlan& plan, const BentoState& state, const OccupancyMask& occupancy) {
  const Mask& box = plan.box_mask;
  if (!box.same_dims(occupancy)) throw Error(Errc::DimMismatch, "occupancy differs in size from the plan masks");
  RgbaImage img(box.width(), box.height(), colors::kTransparent);
  if (state.all_complete) {
    for (std::size_t i = 0; i < box.size(); ++i)
      if (box[i]) img[i] = colors::kWhite;
    return img;
  }

  // Lowest priority first; later layers overwrite.
  for (std::size_t k = 0; k < plan.subtasks.size(); ++k) {
    if (state.status[k] != SubtaskStatus::Pending) continue;
    const auto& t = plan.subtasks[k].target;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i]) img[i] = colors::kBlack;
  }
  const auto& active = plan.subtasks[state.active_index];
  const Rgba palette = opaque(active.display);
  for (std::size_t i = 0; i < box.size(); ++i)
    if (active.target[i]) img[i] = occupancy[i] ? colors::kGreen : palette;
  const Mask spill = spill_area(plan, state);
  for (std::size_t i = 0; i < box.size(); ++i)
    if (spill[i] && occupancy[i]) img[i] = colors::kRed;
  return img;
}

GuidanceImage render_bento_overlay(const BentoPlan& plan, const BentoState& state, const OccupancyMask& occupancy,
                                   const CalibrationProfile& profile) {
  return warp_image(render_bento_camera(plan, state, occupancy), profile.proj_from_cam, profile.proj_dims.w,
                    profile.proj_dims.h);
}

}  // namespace sketchcue
