#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sketchcue/bento.hpp"

using namespace sketchcue;

namespace {

// 2 camera px per mm, box top-left at camera (56, 77).
CalibrationProfile simple_rig() {
  CalibrationProfile p;
  p.cam_from_workspace = Homography::translation(56, 77) * Homography::scale(2, 2) * Homography::translation(-186, -93);
  return p;
}

ColorRegion rect_region(std::uint8_t id, int x0, int y0, int x1, int y1) {
  ColorRegion r{id, {}, 0, 0};
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) r.pixels.push_back({x, y});
  r.area_px = r.pixels.size();
  return r;
}

// Two-subtask plan on a 100x20 raster: left half is subtask 0, the right
// quarter-strip x in [50, 60) is subtask 1.
BentoPlan strip_plan() {
  BentoPlan plan{{}, Mask(100, 20, 1), BentoParams{}};
  Mask a(100, 20), b(100, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 100; ++x) {
      if (x < 50) a.at(x, y) = 1;
      else if (x < 60) b.at(x, y) = 1;
    }
  plan.subtasks.push_back({0, "broccoli", {0, 200, 0}, a});
  plan.subtasks.push_back({1, "fried egg", {255, 255, 0}, b});
  return plan;
}

// Sets the first n pixels (row-major) of `where` in `m`.
void fill_n(Mask& m, const Mask& where, std::size_t n) {
  for (std::size_t i = 0; i < m.size() && n > 0; ++i)
    if (where[i] && !m[i]) m[i] = 1, --n;
}

Mask complement(const Mask& box, const Mask& t) {
  Mask out = box;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (t[i]) out[i] = 0;
  return out;
}

}  // namespace

TEST(BentoParams, MappingAndValidation) {
  const BentoParams p;
  EXPECT_EQ(p.canvas_to_box({600, 405}), (Point2{200, 135}));
  EXPECT_EQ(p.box_to_workspace(p.canvas_to_box({0, 0})), (Point2{186, 93}));
  const Point2 q{123.5, 77.25};
  EXPECT_NEAR(p.workspace_to_box(p.box_to_workspace(p.canvas_to_box(p.box_to_canvas(q)))).x, q.x, 1e-12);
  BentoParams bad;
  bad.canvas_w = 500;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.fill_threshold = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  const auto back = nlohmann::json(p).get<BentoParams>();
  EXPECT_EQ(back.ingredient_map, p.ingredient_map);
  EXPECT_EQ(back.box_origin_mm, p.box_origin_mm);
  EXPECT_THROW(nlohmann::json({{"nope", 1}}).get<BentoParams>(), Error);
}

TEST(BentoPlan, BoxMaskAndAreaOracle) {
  const auto prof = simple_rig();
  const std::vector<ColorRegion> regions{rect_region(0, 30, 30, 270, 210), rect_region(1, 320, 30, 570, 180),
                                         rect_region(3, 300, 240, 540, 360), rect_region(2, 30, 250, 240, 375)};
  const auto plan = build_bento_plan(regions, BentoParams{}, prof, Palette::bento());
  EXPECT_EQ(popcount(plan.box_mask), 400u * 270u);
  EXPECT_EQ(plan.box_mask.at(56, 77), 1);
  EXPECT_EQ(plan.box_mask.at(55, 77), 0);
  EXPECT_EQ(plan.box_mask.at(455, 346), 1);
  EXPECT_EQ(plan.box_mask.at(456, 346), 0);
  ASSERT_EQ(plan.subtasks.size(), 4u);
  // Descending camera area.
  const std::vector<std::uint8_t> want{0, 1, 3, 2};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(plan.subtasks[k].color_id, want[k]);
    EXPECT_EQ(plan.subtasks[k].ingredient, BentoParams{}.ingredient_map.at(want[k]));
    if (k > 0) EXPECT_GE(popcount(plan.subtasks[k - 1].target), popcount(plan.subtasks[k].target));
  }
  for (const auto& s : plan.subtasks) {
    const auto& r = *std::find_if(regions.begin(), regions.end(), [&](const ColorRegion& c) { return c.color_id == s.color_id; });
    const double expect = r.area_px * (2.0 / 3) * (2.0 / 3);
    EXPECT_NEAR(static_cast<double>(popcount(s.target)), expect, 0.02 * expect);
    for (std::size_t i = 0; i < s.target.size(); ++i)
      if (s.target[i]) ASSERT_TRUE(plan.box_mask[i]);
  }
  const Mask sum_check = plan.subtasks[0].target;
  for (std::size_t i = 0; i < sum_check.size(); ++i)
    if (sum_check[i]) EXPECT_FALSE(plan.subtasks[1].target[i]);
}

TEST(BentoPlan, EqualAreaTiesByColorId) {
  const std::vector<ColorRegion> regions{rect_region(2, 300, 30, 390, 120), rect_region(1, 30, 30, 120, 120)};
  const auto plan = build_bento_plan(regions, BentoParams{}, simple_rig(), Palette::bento());
  ASSERT_EQ(plan.subtasks.size(), 2u);
  EXPECT_EQ(popcount(plan.subtasks[0].target), popcount(plan.subtasks[1].target));
  EXPECT_EQ(plan.subtasks[0].color_id, 1);
}

TEST(BentoPlan, Errors) {
  const auto prof = simple_rig();
  try {
    build_bento_plan({rect_region(0, 550, 10, 700, 100)}, BentoParams{}, prof, Palette::bento());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MaskOutsideBox);
  }
  EXPECT_THROW(build_bento_plan({}, BentoParams{}, prof, Palette::bento()), Error);
  try {
    build_bento_plan({rect_region(9, 10, 10, 40, 40)}, BentoParams{}, prof, Palette::bento());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoRegions);
  }
}

TEST(BentoRatios, MatchBruteForce) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution bit(0.4);
  for (int k = 0; k < 20; ++k) {
    Mask box(30, 20), t(30, 20), occ(30, 20);
    for (std::size_t i = 0; i < box.size(); ++i) {
      box[i] = bit(rng) || bit(rng);
      t[i] = box[i] && bit(rng);
      occ[i] = bit(rng);
    }
    if (popcount(t) == 0 || popcount(t) == popcount(box)) continue;
    std::size_t hit = 0, nt = 0, sp = 0;
    for (std::size_t i = 0; i < box.size(); ++i) {
      hit += t[i] && occ[i];
      if (box[i] && !t[i]) ++nt, sp += occ[i] != 0;
    }
    EXPECT_DOUBLE_EQ(region_fill_ratio(t, occ), double(hit) / double(popcount(t)));
    EXPECT_DOUBLE_EQ(spill_ratio(box, t, occ), double(sp) / double(nt));
  }
  EXPECT_THROW(region_fill_ratio(Mask(3, 3), Mask(3, 3)), Error);
  EXPECT_THROW(spill_ratio(Mask(3, 3, 1), Mask(3, 3, 1), Mask(3, 3)), Error);
  EXPECT_THROW(region_fill_ratio(Mask(3, 3, 1), Mask(4, 3)), Error);
}

TEST(BentoState, ThresholdBoundaries) {
  const auto plan = strip_plan();
  const auto s0 = initial_bento_state(plan);
  const Mask& target = plan.subtasks[0].target;  // 1000 px
  const Mask outside = complement(plan.box_mask, target);  // 1000 px
  auto run = [&](std::size_t fill, std::size_t spill) {
    Mask occ(100, 20);
    fill_n(occ, target, fill);
    fill_n(occ, outside, spill);
    return step_bento_state(s0, plan, occ);
  };
  const auto a = run(699, 0);
  EXPECT_EQ(a.status[0], SubtaskStatus::Active);
  EXPECT_DOUBLE_EQ(a.fill_ratio[0], 0.699);
  const auto b = run(700, 199);
  EXPECT_EQ(b.status[0], SubtaskStatus::Complete);
  EXPECT_EQ(b.active_index, 1u);
  EXPECT_EQ(b.status[1], SubtaskStatus::Active);
  const auto c = run(700, 200);
  EXPECT_EQ(c.status[0], SubtaskStatus::Active);
  EXPECT_DOUBLE_EQ(c.spill_ratio, 0.2);
}

TEST(BentoState, StickyCompletionAndSpillExclusion) {
  const auto plan = strip_plan();
  auto s = initial_bento_state(plan);
  EXPECT_EQ(s.status[0], SubtaskStatus::Active);
  EXPECT_EQ(s.status[1], SubtaskStatus::Pending);

  Mask first(100, 20);
  fill_n(first, plan.subtasks[0].target, 1000);
  s = step_bento_state(s, plan, first);
  ASSERT_EQ(s.status[0], SubtaskStatus::Complete);

  // Food stays in the completed region and the second region fills; the
  // completed region must not count as spill.
  Mask both = first;
  fill_n(both, plan.subtasks[1].target, 200);
  s = step_bento_state(s, plan, both);
  EXPECT_EQ(s.status[0], SubtaskStatus::Complete);
  EXPECT_EQ(s.status[1], SubtaskStatus::Complete);
  EXPECT_TRUE(s.all_complete);
  EXPECT_EQ(step_bento_state(s, plan, Mask(100, 20)).status, s.status);

  const auto area = spill_area(plan, initial_bento_state(plan));
  EXPECT_EQ(popcount(area), 1000u);
}

TEST(BentoState, ClearedOccupancyKeepsCompletion) {
  const auto plan = strip_plan();
  auto s = initial_bento_state(plan);
  Mask occ(100, 20);
  fill_n(occ, plan.subtasks[0].target, 800);
  s = step_bento_state(s, plan, occ);
  s = step_bento_state(s, plan, Mask(100, 20));
  EXPECT_EQ(s.status[0], SubtaskStatus::Complete);
  EXPECT_EQ(s.active_index, 1u);
  const auto n_active = std::count(s.status.begin(), s.status.end(), SubtaskStatus::Active);
  EXPECT_EQ(n_active, 1);
  EXPECT_EQ(popcount(spill_area(plan, s)), 2000u - 1000u - 200u);
}

TEST(BentoState, Json) {
  const auto plan = strip_plan();
  const nlohmann::json j = initial_bento_state(plan);
  EXPECT_EQ(j.at("status")[0], "active");
  EXPECT_EQ(j.at("status")[1], "pending");
  EXPECT_EQ(j.at("all_complete"), false);
  const auto back = nlohmann::json(plan).get<BentoPlan>();
  ASSERT_EQ(back.subtasks.size(), 2u);
  EXPECT_EQ(back.subtasks[1].target, plan.subtasks[1].target);
  EXPECT_EQ(back.box_mask, plan.box_mask);
}
