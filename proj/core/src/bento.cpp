#include "sketchcue/bento.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "sketchcue/codec.hpp"

namespace sketchcue {

void BentoParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, "bento params: " + msg); };
  if (!(box_w > 0) || !(box_h > 0) || canvas_w <= 0 || canvas_h <= 0 || !(px_per_mm > 0))
    fail("dimensions must be positive");
  if (std::abs(canvas_w / box_w - px_per_mm) > 1e-9 * px_per_mm ||
      std::abs(canvas_h / box_h - px_per_mm) > 1e-9 * px_per_mm)
    fail("canvas/box ratio must equal px_per_mm on both axes");
  if (!(fill_threshold > 0 && fill_threshold < 1) || !(spill_threshold > 0 && spill_threshold < 1))
    fail("thresholds must lie in (0, 1)");
  if (!finite(box_origin_mm)) fail("box origin must be finite");
}

namespace {

std::size_t count_and(const Mask& a, const Mask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] & b[i]) != 0;
  return n;
}

}  // namespace

BentoPlan build_bento_plan(const std::vector<ColorRegion>& regions, const BentoParams& params,
                           const CalibrationProfile& profile, const Palette& palette) {
  params.validate();
  if (regions.empty()) throw Error(Errc::NoRegions, "sketch has no color regions");

  const int cw = profile.cam_dims.w, ch = profile.cam_dims.h;
  const Homography cam_from_canvas =
      profile.cam_from_workspace * Homography::translation(params.box_origin_mm.x, params.box_origin_mm.y) *
      Homography::scale(1.0 / params.px_per_mm, 1.0 / params.px_per_mm);

  // Canvas labels restricted to the kept regions; regions outside the canvas
  // extent lie outside the box.
  LabelImage canvas(params.canvas_w, params.canvas_h, kBackgroundLabel);
  std::map<std::uint8_t, std::pair<std::size_t, std::size_t>> outside;  // color -> (outside, total)
  for (const auto& r : regions) {
    if (!params.ingredient_map.contains(r.color_id)) continue;
    auto& [out_n, total] = outside[r.color_id];
    for (const auto& p : r.pixels) {
      ++total;
      const Point2 cam = cam_from_canvas.apply({p.x + 0.5, p.y + 0.5});
      const bool in_canvas = canvas.contains(p.x, p.y);
      const bool in_camera = cam.x >= -0.5 && cam.y >= -0.5 && cam.x < cw - 0.5 && cam.y < ch - 0.5;
      if (in_canvas && in_camera) canvas.at(p.x, p.y) = r.color_id;
      else ++out_n;
    }
  }
  if (outside.empty()) throw Error(Errc::NoRegions, "no region uses an ingredient color");
  for (const auto& [color, counts] : outside)
    if (counts.first * 20 > counts.second)
      throw Error(Errc::MaskOutsideBox,
                  "more than 5% of color " + std::to_string(color) + " falls outside the box");

  BentoPlan plan{{}, Mask(cw, ch, 0), params};
  std::map<std::uint8_t, Mask> targets;
  const Homography canvas_from_cam = cam_from_canvas.inverse();
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) {
      const Point2 c = canvas_from_cam.apply({static_cast<double>(x), static_cast<double>(y)});
      if (c.x < 0 || c.y < 0 || c.x >= params.canvas_w || c.y >= params.canvas_h) continue;
      plan.box_mask.at(x, y) = 1;
      const std::uint8_t label = canvas.at(static_cast<int>(c.x), static_cast<int>(c.y));
      if (label == kBackgroundLabel) continue;
      auto [it, inserted] = targets.try_emplace(label, cw, ch, std::uint8_t{0});
      it->second.at(x, y) = 1;
    }

  for (auto& [color, mask] : targets) {
    const auto* entry = palette.find(color);
    plan.subtasks.push_back({color, params.ingredient_map.at(color), entry ? entry->rgb : Rgb{255, 255, 255},
                             std::move(mask)});
  }
  if (plan.subtasks.empty()) throw Error(Errc::NoRegions, "regions vanish when mapped into the camera frame");

  std::stable_sort(plan.subtasks.begin(), plan.subtasks.end(), [](const BentoSubtask& a, const BentoSubtask& b) {
    const auto aa = popcount(a.target), ab = popcount(b.target);
    return aa != ab ? aa > ab : a.color_id < b.color_id;
  });
  return plan;
}

double region_fill_ratio(const Mask& target, const OccupancyMask& occupancy) {
  if (!target.same_dims(occupancy)) throw Error(Errc::DimMismatch, "target and occupancy differ in size");
  const std::size_t total = popcount(target);
  if (total == 0) throw Error(Errc::EmptyTarget, "target mask is empty");
  return static_cast<double>(count_and(target, occupancy)) / static_cast<double>(total);
}

double spill_ratio(const Mask& box_mask, const Mask& active_target, const OccupancyMask& occupancy) {
  if (!box_mask.same_dims(active_target) || !box_mask.same_dims(occupancy))
    throw Error(Errc::DimMismatch, "box, target and occupancy differ in size");
  std::size_t non_target = 0, spilled = 0;
  for (std::size_t i = 0; i < box_mask.size(); ++i) {
    if (!box_mask[i] || active_target[i]) continue;
    ++non_target;
    spilled += occupancy[i] != 0;
  }
  if (non_target == 0) throw Error(Errc::EmptyNonTarget, "box has no non-target area");
  return static_cast<double>(spilled) / static_cast<double>(non_target);
}

BentoState initial_bento_state(const BentoPlan& plan) {
  BentoState s;
  const std::size_t n = plan.subtasks.size();
  s.status.assign(n, SubtaskStatus::Pending);
  s.fill_ratio.assign(n, 0.0);
  if (n == 0) s.all_complete = true;
  else s.status[0] = SubtaskStatus::Active;
  return s;
}

Mask spill_area(const BentoPlan& plan, const BentoState& state) {
  Mask area = plan.box_mask;
  for (std::size_t k = 0; k < plan.subtasks.size(); ++k) {
    const bool excluded = state.status[k] == SubtaskStatus::Complete ||
                          (!state.all_complete && k == state.active_index);
    if (!excluded) continue;
    const auto& t = plan.subtasks[k].target;
    for (std::size_t i = 0; i < area.size(); ++i)
      if (t[i]) area[i] = 0;
  }
  return area;
}

BentoState step_bento_state(const BentoState& state, const BentoPlan& plan, const OccupancyMask& occupancy) {
  if (state.all_complete) return state;
  if (state.status.size() != plan.subtasks.size() || state.active_index >= plan.subtasks.size())
    throw Error(Errc::InvalidState, "bento state does not belong to this plan");

  BentoState next = state;
  const std::size_t a = state.active_index;
  const auto& target = plan.subtasks[a].target;

  // Completed targets are excluded from the spill test entirely.
  Mask box = plan.box_mask;
  for (std::size_t k = 0; k < plan.subtasks.size(); ++k)
    if (state.status[k] == SubtaskStatus::Complete)
      for (std::size_t i = 0; i < box.size(); ++i)
        if (plan.subtasks[k].target[i]) box[i] = 0;

  next.fill_ratio[a] = region_fill_ratio(target, occupancy);
  try {
    next.spill_ratio = spill_ratio(box, target, occupancy);
  } catch (const Error& e) {
    if (e.code() != Errc::EmptyNonTarget) throw;
    next.spill_ratio = 0.0;
  }

  if (next.fill_ratio[a] >= plan.params.fill_threshold && next.spill_ratio < plan.params.spill_threshold) {
    next.status[a] = SubtaskStatus::Complete;
    if (a + 1 < plan.subtasks.size()) {
      next.active_index = a + 1;
      next.status[a + 1] = SubtaskStatus::Active;
    } else {
      next.all_complete = true;
    }
  }
  return next;
}

std::string_view status_name(SubtaskStatus s) {
  switch (s) {
    case SubtaskStatus::Pending: return "pending";
    case SubtaskStatus::Active: return "active";
    case SubtaskStatus::Complete: return "complete";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const BentoParams& p) {
  nlohmann::json ingredients = nlohmann::json::object();
  for (const auto& [id, name] : p.ingredient_map) ingredients[std::to_string(id)] = name;
  j = nlohmann::json{{"box_w", p.box_w},
                     {"box_h", p.box_h},
                     {"canvas", {{"w", p.canvas_w}, {"h", p.canvas_h}}},
                     {"px_per_mm", p.px_per_mm},
                     {"fill_threshold", p.fill_threshold},
                     {"spill_threshold", p.spill_threshold},
                     {"box_origin_mm", {p.box_origin_mm.x, p.box_origin_mm.y}},
                     {"ingredient_map", std::move(ingredients)}};
}

void from_json(const nlohmann::json& j, BentoParams& p) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "bento params must be an object");
  BentoParams out;
  const nlohmann::json defaults = out;
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) throw Error(Errc::InvalidConfig, "unknown bento parameter '" + key + "'");
  try {
    out.box_w = j.value("box_w", out.box_w);
    out.box_h = j.value("box_h", out.box_h);
    if (j.contains("canvas")) {
      out.canvas_w = j["canvas"].at("w").get<int>();
      out.canvas_h = j["canvas"].at("h").get<int>();
    }
    out.px_per_mm = j.value("px_per_mm", out.px_per_mm);
    out.fill_threshold = j.value("fill_threshold", out.fill_threshold);
    out.spill_threshold = j.value("spill_threshold", out.spill_threshold);
    if (j.contains("box_origin_mm")) out.box_origin_mm = j["box_origin_mm"].get<Point2>();
    if (j.contains("ingredient_map")) {
      out.ingredient_map.clear();
      for (const auto& [key, value] : j["ingredient_map"].items())
        out.ingredient_map[static_cast<std::uint8_t>(std::stoi(key))] = value.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("bento params: ") + e.what());
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidConfig, "bento params: ingredient_map keys must be color ids");
  }
  out.validate();
  p = out;
}

void to_json(nlohmann::json& j, const BentoPlan& p) {
  auto subtasks = nlohmann::json::array();
  for (const auto& s : p.subtasks)
    subtasks.push_back({{"color", s.color_id},
                        {"ingredient", s.ingredient},
                        {"rgb", {s.display.r, s.display.g, s.display.b}},
                        {"area_px", popcount(s.target)},
                        {"mask_rle", mask_to_json(s.target)}});
  j = nlohmann::json{{"task", "bento"},
                     {"params", p.params},
                     {"subtasks", std::move(subtasks)},
                     {"box_mask_rle", mask_to_json(p.box_mask)}};
}

void from_json(const nlohmann::json& j, BentoPlan& p) {
  try {
    if (j.at("task") != "bento") throw Error(Errc::MalformedInput, "plan is not a bento plan");
    BentoPlan out;
    out.params = j.at("params").get<BentoParams>();
    out.box_mask = mask_from_json(j.at("box_mask_rle"));
    for (const auto& s : j.at("subtasks")) {
      const auto rgb = s.at("rgb").get<std::array<std::uint8_t, 3>>();
      out.subtasks.push_back({s.at("color").get<std::uint8_t>(), s.at("ingredient").get<std::string>(),
                              {rgb[0], rgb[1], rgb[2]}, mask_from_json(s.at("mask_rle"))});
      if (!out.subtasks.back().target.same_dims(out.box_mask))
        throw Error(Errc::MalformedInput, "subtask mask differs in size from the box mask");
    }
    p = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("bento plan: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const BentoState& s) {
  auto status = nlohmann::json::array();
  for (auto st : s.status) status.push_back(status_name(st));
  j = nlohmann::json{{"active_index", s.active_index},
                     {"status", std::move(status)},
                     {"fill", s.fill_ratio},
                     {"spill", s.spill_ratio},
                     {"all_complete", s.all_complete}};
}

}  // namespace sketchcue
