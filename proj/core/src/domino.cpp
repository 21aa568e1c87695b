#include "sketchcue/domino.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include <nlohmann/json.hpp>

namespace sketchcue {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

void DominoParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, "domino params: " + msg); };
  if (!(width > 0) || !(height > 0) || !(thickness > 0)) fail("block dimensions must be positive");
  if (!(thickness < center_spacing)) fail("thickness must be below center_spacing");
  const double gap = center_spacing - thickness;
  if (!(gap >= 2.0) || !(gap < height)) fail("gap (center_spacing - thickness) must be in [2, height)");
  if (!(0 < correct_mm && correct_mm < yellow_mm && yellow_mm < red_mm)) fail("need 0 < correct < yellow < red");
  if (!(max_turn_deg > 0 && max_turn_deg < 180)) fail("max_turn_deg must be in (0, 180)");
  if (!(min_contact_height_frac >= 0 && min_contact_height_frac <= 1)) fail("min_contact_height_frac outside [0, 1]");
  if (!(min_width_overlap_frac >= 0 && min_width_overlap_frac <= 1)) fail("min_width_overlap_frac outside [0, 1]");
  if (!(resample_mm > 0) || !(prune_gap_mm > 0) || smooth_window < 1 || smooth_window % 2 == 0)
    fail("stroke cleaning settings invalid");
}

std::string_view violation_name(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::TooShort: return "too_short";
    case Violation::Kind::Overlap: return "overlap";
    case Violation::Kind::Spacing: return "spacing";
    case Violation::Kind::Turn: return "turn";
    case Violation::Kind::Heading: return "heading";
  }
  return "unknown";
}

Stroke clean_stroke(const Stroke& stroke_px, double px_per_mm, const DominoParams& params) {
  if (!(px_per_mm > 0)) throw Error(Errc::MalformedInput, "px_per_mm must be positive");
  Stroke mm{{}, stroke_px.color_id, stroke_px.width / px_per_mm};
  mm.points.reserve(stroke_px.points.size());
  for (const auto& p : stroke_px.points) mm.points.push_back(p * (1.0 / px_per_mm));
  mm = resample_stroke(mm, params.resample_mm, 1.0);
  mm = smooth_stroke(mm, params.smooth_window);
  return prune_dense_vertices(mm, params.prune_gap_mm, 1.0);
}

namespace {

struct PolylinePos {
  std::size_t seg = 0;  // segment index: points[seg] -> points[seg + 1]
  double t = 0.0;
};

Point2 unit(Point2 v) {
  const double n = norm(v);
  return n > 0 ? v * (1.0 / n) : Point2{1, 0};
}

Point2 tangent_at(const std::vector<Point2>& pts, PolylinePos pos) {
  const std::size_t nseg = pts.size() - 1;
  const Point2 here = unit(pts[pos.seg + 1] - pts[pos.seg]);
  constexpr double at_vertex = 1e-9;
  if (pos.t <= at_vertex && pos.seg > 0) return unit(here + unit(pts[pos.seg] - pts[pos.seg - 1]));
  if (pos.t >= 1 - at_vertex && pos.seg + 1 < nseg) return unit(here + unit(pts[pos.seg + 2] - pts[pos.seg + 1]));
  return here;
}

// First point after `from` along the polyline at straight-line distance
// `radius` from `center`.
std::optional<PolylinePos> next_on_circle(const std::vector<Point2>& pts, PolylinePos from, Point2 center,
                                          double radius) {
  for (std::size_t k = from.seg; k + 1 < pts.size(); ++k) {
    const Point2 a = pts[k], d = pts[k + 1] - pts[k];
    const double qa = dot(d, d);
    if (qa == 0) continue;
    const double qb = 2 * dot(d, a - center);
    const double qc = dot(a - center, a - center) - radius * radius;
    const double disc = qb * qb - 4 * qa * qc;
    if (disc < 0) continue;
    const double sq = std::sqrt(disc);
    const double t_start = k == from.seg ? from.t : 0.0;
    for (double t : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)}) {
      if (t > t_start + 1e-12 && t <= 1 + 1e-9) return PolylinePos{k, std::min(t, 1.0)};
    }
  }
  return std::nullopt;
}

Point2 point_at(const std::vector<Point2>& pts, PolylinePos pos) {
  return pts[pos.seg] + pos.t * (pts[pos.seg + 1] - pts[pos.seg]);
}

}  // namespace

DominoPlan plan_dominoes(const Stroke& stroke_mm, const DominoParams& params) {
  params.validate();
  const auto& pts = stroke_mm.points;
  DominoPlan plan{{}, params};
  if (pts.size() < 2 || stroke_mm.arc_length() < params.center_spacing) {
    ValidationReport report{{{Violation::Kind::TooShort, 0, 0, stroke_mm.arc_length(), params.center_spacing}}};
    throw InfeasibleStrokeError(std::move(report), "stroke is shorter than one block spacing");
  }

  PolylinePos pos{0, 0.0};
  Point2 c = pts.front();
  while (true) {
    const Point2 t = tangent_at(pts, pos);
    plan.targets.push_back({c, std::atan2(t.y, t.x)});
    const auto next = next_on_circle(pts, pos, c, params.center_spacing);
    if (!next) break;
    pos = *next;
    c = point_at(pts, pos);
  }
  if (plan.targets.size() < 2) {
    ValidationReport report{{{Violation::Kind::TooShort, 0, 0, stroke_mm.arc_length(), params.center_spacing}}};
    throw InfeasibleStrokeError(std::move(report), "stroke does not reach one block spacing from its start");
  }

  auto report = validate_plan(plan);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw InfeasibleStrokeError(std::move(report), "planned layout violates " + std::string(violation_name(v.kind)) +
                                                       " between blocks " + std::to_string(v.first) + " and " +
                                                       std::to_string(v.second));
  }
  return plan;
}

ValidationReport validate_plan(const DominoPlan& plan) {
  ValidationReport report;
  const auto& p = plan.params;
  const auto& t = plan.targets;
  const std::size_t n = t.size();

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(t[i].center, t[j].center);
      if (d <= 2 * p.center_spacing && rects_intersect(plan.footprint(i), plan.footprint(j)))
        report.violations.push_back({Violation::Kind::Overlap, i, j, d, 0.0});
    }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Point2 chord = t[i + 1].center - t[i].center;
    const double d = norm(chord);
    if (d < 0.9 * p.center_spacing || d > 1.1 * p.center_spacing)
      report.violations.push_back({Violation::Kind::Spacing, i, i + 1, d, p.center_spacing});

    const double turn = std::abs(normalize_angle(t[i + 1].theta - t[i].theta)) / kDeg;
    if (turn > p.max_turn_deg) report.violations.push_back({Violation::Kind::Turn, i, i + 1, turn, p.max_turn_deg});

    // The successor must lie ahead of the block's face, within half the turn
    // bound of its heading.
    if (d > 0) {
      const double heading = std::abs(normalize_angle(std::atan2(chord.y, chord.x) - t[i].theta)) / kDeg;
      if (heading > p.max_turn_deg / 2)
        report.violations.push_back({Violation::Kind::Heading, i, i + 1, heading, p.max_turn_deg / 2});
    }
  }
  return report;
}

double contact_height(double gap, double height) {
  if (!(gap < height)) return 0.0;
  return std::sqrt(height * height - gap * gap);
}

ToppleResult topple_simulate(const DominoPlan& plan) {
  const auto& p = plan.params;
  const auto& t = plan.targets;
  ToppleResult r;
  r.fell.assign(t.size(), false);
  if (t.empty()) return r;
  r.fell[0] = true;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const Point2 d = t[i + 1].center - t[i].center;
    const Point2 heading = direction(t[i].theta);
    const double along = dot(d, heading);
    ToppleLink link;
    link.gap = along - p.thickness;
    link.lateral = std::abs(cross(heading, d));
    link.contact_height = contact_height(link.gap, p.height);
    link.width_overlap = std::max(0.0, p.width - link.lateral);
    r.links.push_back(link);

    const bool knocks = along > 0 && link.gap < p.height &&
                        link.contact_height >= p.min_contact_height_frac * p.height &&
                        link.width_overlap >= p.min_width_overlap_frac * p.width;
    if (!knocks) {
      r.first_break = i + 1;
      break;
    }
    r.fell[i + 1] = true;
  }
  return r;
}

Assignment match_detections(const DominoPlan& plan, const std::vector<DetectedBlock>& detections) {
  const double max_d = 2 * plan.params.red_mm;
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < plan.targets.size(); ++i)
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const double d = distance(plan.targets[i].center, detections[j].pose.center);
      if (d <= max_d) candidates.emplace_back(d, i, j);
    }
  std::sort(candidates.begin(), candidates.end());

  Assignment a;
  std::vector<bool> t_used(plan.targets.size(), false), d_used(detections.size(), false);
  for (const auto& [d, i, j] : candidates) {
    if (t_used[i] || d_used[j]) continue;
    t_used[i] = d_used[j] = true;
    a.pairs.push_back({i, j, d});
  }
  std::sort(a.pairs.begin(), a.pairs.end(), [](const Match& x, const Match& y) { return x.target < y.target; });
  for (std::size_t i = 0; i < t_used.size(); ++i)
    if (!t_used[i]) a.unmatched_targets.push_back(i);
  for (std::size_t j = 0; j < d_used.size(); ++j)
    if (!d_used[j]) a.unmatched_detections.push_back(j);
  return a;
}

Rgb feedback_color(double distance_mm, const DominoParams& params) {
  auto channel = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); };
  const double d = std::max(0.0, distance_mm);
  if (d <= params.correct_mm) return {0, 255, 0};
  if (d <= params.yellow_mm) {
    const double f = (d - params.correct_mm) / (params.yellow_mm - params.correct_mm);
    return {channel(255 * f), 255, 0};
  }
  if (d <= params.red_mm) {
    const double f = (d - params.yellow_mm) / (params.red_mm - params.yellow_mm);
    return {255, channel(255 * (1 - f)), 0};
  }
  return {255, 0, 0};
}

void to_json(nlohmann::json& j, const DominoParams& p) {
  j = nlohmann::json{{"width", p.width},
                     {"height", p.height},
                     {"thickness", p.thickness},
                     {"center_spacing", p.center_spacing},
                     {"max_turn_deg", p.max_turn_deg},
                     {"correct_mm", p.correct_mm},
                     {"yellow_mm", p.yellow_mm},
                     {"red_mm", p.red_mm},
                     {"min_contact_height_frac", p.min_contact_height_frac},
                     {"min_width_overlap_frac", p.min_width_overlap_frac},
                     {"resample_mm", p.resample_mm},
                     {"smooth_window", p.smooth_window},
                     {"prune_gap_mm", p.prune_gap_mm}};
}

void from_json(const nlohmann::json& j, DominoParams& p) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "domino params must be an object");
  DominoParams out;
  const nlohmann::json defaults = out;
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw Error(Errc::InvalidConfig, "unknown domino parameter '" + key + "'");
    if (!value.is_number()) throw Error(Errc::InvalidConfig, "domino parameter '" + key + "' must be a number");
  }
  out.width = j.value("width", out.width);
  out.height = j.value("height", out.height);
  out.thickness = j.value("thickness", out.thickness);
  out.center_spacing = j.value("center_spacing", out.center_spacing);
  out.max_turn_deg = j.value("max_turn_deg", out.max_turn_deg);
  out.correct_mm = j.value("correct_mm", out.correct_mm);
  out.yellow_mm = j.value("yellow_mm", out.yellow_mm);
  out.red_mm = j.value("red_mm", out.red_mm);
  out.min_contact_height_frac = j.value("min_contact_height_frac", out.min_contact_height_frac);
  out.min_width_overlap_frac = j.value("min_width_overlap_frac", out.min_width_overlap_frac);
  out.resample_mm = j.value("resample_mm", out.resample_mm);
  out.smooth_window = j.value("smooth_window", out.smooth_window);
  out.prune_gap_mm = j.value("prune_gap_mm", out.prune_gap_mm);
  out.validate();
  p = out;
}

void to_json(nlohmann::json& j, const DominoPlan& p) {
  auto targets = nlohmann::json::array();
  for (const auto& t : p.targets) targets.push_back({{"x", t.center.x}, {"y", t.center.y}, {"theta", t.theta}});
  j = nlohmann::json{{"task", "domino"}, {"params", p.params}, {"targets", std::move(targets)}};
}

void from_json(const nlohmann::json& j, DominoPlan& p) {
  try {
    if (j.at("task") != "domino") throw Error(Errc::MalformedInput, "plan is not a domino plan");
    DominoPlan out;
    out.params = j.at("params").get<DominoParams>();
    for (const auto& t : j.at("targets"))
      out.targets.push_back({{t.at("x").get<double>(), t.at("y").get<double>()}, t.at("theta").get<double>()});
    p = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("domino plan: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const ValidationReport& r) {
  j = nlohmann::json::array();
  for (const auto& v : r.violations)
    j.push_back({{"kind", violation_name(v.kind)},
                 {"blocks", {v.first, v.second}},
                 {"value", v.value},
                 {"limit", v.limit}});
}

void to_json(nlohmann::json& j, const Assignment& a) {
  auto pairs = nlohmann::json::array();
  for (const auto& m : a.pairs) pairs.push_back({{"target", m.target}, {"detection", m.detection}, {"distance", m.distance}});
  j = nlohmann::json{{"pairs", std::move(pairs)},
                     {"unmatched_targets", a.unmatched_targets},
                     {"unmatched_detections", a.unmatched_detections}};
}

}  // namespace sketchcue
