// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sketchcue/bento.hpp"
#include "sketchcue/calibration.hpp"
#include "sketchcue/domino.hpp"
#include "sketchcue/render.hpp"
#include "sketchcue/scenario.hpp"
#include "sketchcue/sensing.hpp"
#include "sketchcue/session.hpp"
#include "sketchcue/simulator.hpp"

using namespace sketchcue;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;  // 0 means no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Stroke straight(double len) {
  Stroke s;
  for (int i = 0; i <= 140; ++i) s.points.push_back({100 + len * i / 140, 160});
  return s;
}

Stroke arc(double r, double sweep) {
  Stroke s;
  const int n = static_cast<int>(std::ceil(r * sweep));
  for (int i = 0; i <= n; ++i) s.points.push_back({286 + r * std::cos(sweep * i / n), 160 + r * std::sin(sweep * i / n)});
  return s;
}

ScenarioScript fixture_script(const std::string& name) {
  auto s = parse_scenario(oracle::load_fixture(name));
  s.sketch = oracle::load_fixture(*s.sketch_path);
  s.sketch_path.reset();
  return s;
}

Outcome calibration() {
  const oracle::Mat3 cam_ws{0.78, 0.04, 26, -0.03, 1.12, 38, 2e-5, 5e-5, 1};
  const oracle::Mat3 proj_cam{2.45, 0.08, 6, 0.03, 1.66, -4, 3e-5, -2e-5, 1};
  const std::vector<Point2> ws{{0, 0}, {572, 0}, {0, 321}, {572, 321}, {120, 60}, {430, 250}, {286, 160}, {60, 280}};
  double worst_held = 0, worst_exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0, 0.2);
    std::vector<Correspondence> ws_cam, ws_cam_exact, proj_cam_pins;
    for (const auto& p : ws) {
      const Point2 c = oracle::project(cam_ws, p);
      ws_cam_exact.push_back({p, c});
      ws_cam.push_back({p, c + Point2{noise(rng), noise(rng)}});
      proj_cam_pins.push_back({oracle::project(proj_cam, c), c});
    }
    const auto noisy = calibrate(proj_cam_pins, ws_cam, {512, 424}, {1280, 720}, kWorkspaceDims);
    std::uniform_real_distribution<double> ux(0, 572), uy(0, 321);
    double se = 0;
    for (int i = 0; i < 50; ++i) {
      const Point2 p{ux(rng), uy(rng)};
      se += std::pow(distance(workspace_to_camera(noisy, p), oracle::project(cam_ws, p)), 2);
    }
    worst_held = std::max(worst_held, std::sqrt(se / 50));
    const auto exact = calibrate(proj_cam_pins, ws_cam_exact, {512, 424}, {1280, 720}, kWorkspaceDims);
    worst_exact = std::max(worst_exact, exact.rms_residual);
  }
  return {worst_held <= 0.5 && worst_exact <= 1e-6,
          fmt("held-out RMS max %.3f px over 20 rigs, noiseless %.1e px", worst_held, worst_exact)};
}

Outcome sensing() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> base(600, 1000), lift(-30, 60), drop(0, 49);
  std::size_t mismatched = 0;
  for (int k = 0; k < 100; ++k) {
    EnvironmentMap env{Image<float>(512, 424), Mask(512, 424, 1)};
    DepthFrame f{Image<std::uint16_t>(512, 424), 0};
    for (std::size_t i = 0; i < f.depth_mm.size(); ++i) {
      env.baseline_mm[i] = static_cast<float>(base(rng));
      env.valid[i] = drop(rng) != 0;
      int l = lift(rng);
      if (k % 2 == 0 && i % 7 == 0) l = 8;  // boundary pixels
      f.depth_mm[i] = drop(rng) == 0 ? 0 : static_cast<std::uint16_t>(env.baseline_mm[i] - l);
    }
    mismatched += occupancy_mask(env, f) != oracle::occupancy(env, f, 8.0);
  }
  EnvironmentMap env{Image<float>(2, 1, 800.0f), Mask(2, 1, 1)};
  DepthFrame f{Image<std::uint16_t>(2, 1), 0};
  f.depth_mm.at(0, 0) = 792;
  f.depth_mm.at(1, 0) = 791;
  const auto m = occupancy_mask(env, f);
  const bool strict = m.at(0, 0) == 0 && m.at(1, 0) == 1;
  return {mismatched == 0 && strict, fmt("%zu/100 pairs differ, 8.0 mm boundary %s", mismatched, strict ? "excluded" : "INCLUDED")};
}

Outcome domino_planning() {
  const DominoParams p;
  const auto plan = plan_dominoes(straight(280), p);
  double worst = 0;
  for (std::size_t i = 0; i + 1 < plan.targets.size(); ++i)
    worst = std::max(worst, std::abs(distance(plan.targets[i].center, plan.targets[i + 1].center) - 28));
  std::size_t overlaps = 0;
  for (std::size_t i = 0; i < plan.targets.size(); ++i)
    for (std::size_t j = i + 1; j < plan.targets.size(); ++j) overlaps += rects_intersect(plan.footprint(i), plan.footprint(j));
  const auto top = topple_simulate(plan);
  const auto fell = std::count(top.fell.begin(), top.fell.end(), true);

  bool wide_ok = false;
  try {
    wide_ok = validate_plan(plan_dominoes(arc(200, 1.5), p)).ok();
  } catch (const Error&) {
  }
  bool tight_turn = false;
  try {
    plan_dominoes(arc(30, 3.0), p);
  } catch (const InfeasibleStrokeError& e) {
    for (const auto& v : e.report().violations) tight_turn |= v.kind == Violation::Kind::Turn;
  }
  const bool ok = plan.targets.size() == 11 && worst <= 1e-6 && overlaps == 0 &&
                  fell == static_cast<long>(plan.targets.size()) && wide_ok && tight_turn;
  return {ok, fmt("%zu targets, spacing err %.1e mm, %zu overlaps, %ld/%zu fell, r200 %s, r30 %s", plan.targets.size(), worst,
                  overlaps, static_cast<long>(fell), plan.targets.size(), wide_ok ? "valid" : "INVALID",
                  tight_turn ? "turn violation" : "NOT REJECTED")};
}

Outcome topple_anchor() {
  const double falls = std::sqrt(46.0 * 46 - 20 * 20), breaks = std::sqrt(46.0 * 46 - 44 * 44);
  DominoPlan a{{}, DominoParams{}}, b{{}, DominoParams{}};
  b.params.center_spacing = 52;
  for (int i = 0; i < 3; ++i) {
    a.targets.push_back({{28.0 * i, 0}, 0.0});
    b.targets.push_back({{52.0 * i, 0}, 0.0});
  }
  const auto ra = topple_simulate(a), rb = topple_simulate(b);
  const double ea = std::abs(ra.links[0].contact_height - falls), eb = std::abs(rb.links[0].contact_height - breaks);
  const bool ok = ea <= 1e-9 && eb <= 1e-9 && std::abs(contact_height(20, 46) - falls) <= 1e-9 &&
                  std::abs(contact_height(44, 46) - breaks) <= 1e-9 && !ra.first_break && rb.first_break == 1u &&
                  falls >= 13.8 && breaks < 13.8;
  return {ok, fmt("gap 20: %.4f mm (falls), gap 44: %.4f mm (breaks at block %zu), err %.1e/%.1e", ra.links[0].contact_height,
                  rb.links[0].contact_height, rb.first_break.value_or(0) + 1, ea, eb)};
}

Outcome feedback() {
  const DominoParams p;
  const Rgb red{255, 0, 0}, yellow{255, 255, 0}, green{0, 255, 0};
  bool anchors = feedback_color(25, p) == red && feedback_color(10, p) == yellow;
  for (int i = 0; i <= 50; ++i) anchors &= feedback_color(i * 0.1, p) == green;
  bool monotone = true;
  int max_jump = 0;
  Rgb prev = feedback_color(0, p);
  for (int i = 1; i <= 300; ++i) {
    const Rgb c = feedback_color(i * 0.1, p);
    monotone &= c.r >= prev.r && c.g <= prev.g && c.b == 0;
    max_jump = std::max({max_jump, std::abs(c.r - prev.r), std::abs(c.g - prev.g)});
    prev = c;
  }
  // A linear ramp over 5 mm moves at most 255 * 0.1 / 5 = 5.1 levels per step.
  const bool continuous = max_jump <= 6;
  return {anchors && monotone && continuous,
          fmt("anchors %s, monotone %s, max step %d levels", anchors ? "ok" : "WRONG", monotone ? "yes" : "NO", max_jump)};
}

Outcome bento_thresholds() {
  BentoPlan plan{{}, Mask(100, 20, 1), BentoParams{}};
  Mask a(100, 20), b(100, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 60; ++x) (x < 50 ? a : b).at(x, y) = 1;
  plan.subtasks.push_back({0, "broccoli", {0, 200, 0}, a});
  plan.subtasks.push_back({1, "fried egg", {255, 255, 0}, b});
  Mask outside = plan.box_mask;
  for (std::size_t i = 0; i < outside.size(); ++i) outside[i] = !a[i];
  auto step = [&](std::size_t fill, std::size_t spill) {
    Mask occ(100, 20);
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (a[i] && fill > 0) occ[i] = 1, --fill;
      if (outside[i] && spill > 0) occ[i] = 1, --spill;
    }
    return step_bento_state(initial_bento_state(plan), plan, occ).status[0];
  };
  const auto s1 = step(699, 0), s2 = step(700, 199), s3 = step(700, 200);
  const bool ok = s1 == SubtaskStatus::Active && s2 == SubtaskStatus::Complete && s3 == SubtaskStatus::Active;
  return {ok, fmt("0.699/0 %s, 0.700/0.199 %s, 0.700/0.200 %s", status_name(s1).data(), status_name(s2).data(),
                  status_name(s3).data())};
}

Outcome e2e_domino() {
  const auto script = fixture_script("domino_scenario.json");
  auto s1 = session_for_script(script);
  const auto r1 = run_script(script, *s1);
  auto s2 = session_for_script(script);
  const auto r2 = run_script(script, *s2);
  const auto snap = s1->snapshot();
  const bool identical = r1.dump() == r2.dump() && *snap->overlay == *s2->snapshot()->overlay;

  // Count green blobs in the projected overlay.
  const auto blobs = oracle::components(*snap->overlay, [](const Rgba& p) { return p == colors::kGreen; });
  std::size_t circles = 0;
  for (const auto& b : blobs) circles += b.size() >= 200;
  // The script must actually place every block within 3 mm of a target.
  const auto& targets = snap->domino_plan->targets;
  std::size_t placed = 0;
  double worst = 0;
  for (const auto& e : script.events) {
    if (e.at("op") != "place") continue;
    const Point2 c{e.at("rect").at("x").get<double>(), e.at("rect").at("y").get<double>()};
    double best = 1e9;
    for (const auto& t : targets) best = std::min(best, distance(c, t.center));
    worst = std::max(worst, best);
    ++placed;
  }
  const bool done = r1.at("final_state").at("phase") == "done";
  const bool ok = placed == 11 && worst <= 3 && s1->config().noise_sigma_mm == 2.0 && done && circles == 11 &&
                  identical && r1.at("asserts").at("failed") == 0;
  return {ok, fmt("%zu blocks placed, worst offset %.2f mm, phase %s, %zu green circles, reports %s", placed, worst,
                  r1.at("final_state").at("phase").get<std::string>().c_str(), circles,
                  identical ? "byte-identical" : "DIFFER")};
}

Outcome e2e_bento() {
  const auto script = fixture_script("bento_scenario.json");
  auto s = session_for_script(script);
  const auto plan = s->snapshot()->bento_plan;
  bool descending = true;
  for (std::size_t k = 1; k < plan->subtasks.size(); ++k)
    descending &= popcount(plan->subtasks[k - 1].target) >= popcount(plan->subtasks[k].target);

  // Completion order and fill at the frame each subtask completes.
  std::vector<std::size_t> completed_order;
  double min_fill = 1.0;
  const auto report = run_script(script, *s, [&](std::size_t, const SessionSnapshot& snap) {
    for (std::size_t k = 0; k < snap.bento->status.size(); ++k)
      if (snap.bento->status[k] == SubtaskStatus::Complete &&
          std::find(completed_order.begin(), completed_order.end(), k) == completed_order.end()) {
        completed_order.push_back(k);
        min_fill = std::min(min_fill, snap.bento->fill_ratio[k]);
      }
  });
  bool in_order = completed_order.size() == plan->subtasks.size();
  for (std::size_t k = 0; in_order && k < completed_order.size(); ++k) in_order = completed_order[k] == k;

  const auto snap = s->snapshot();
  const auto& img = *snap->overlay;
  const auto prof = s->config().calibration;
  const Homography cam_from_proj = prof.proj_from_cam.inverse();
  std::size_t box_px = 0, not_white = 0, stray = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Point2 c = cam_from_proj.apply({double(x), double(y)});
      const int cx = int(std::nearbyint(c.x)), cy = int(std::nearbyint(c.y));
      const bool in_box = plan->box_mask.contains(cx, cy) && plan->box_mask.at(cx, cy);
      if (in_box) ++box_px, not_white += img.at(x, y) != colors::kWhite;
      else stray += img.at(x, y).a != 0;
    }
  const bool ok = descending && in_order && min_fill >= 0.75 && box_px > 0 && not_white == 0 && stray == 0 &&
                  snap->phase == Phase::Done;
  return {ok, fmt("order %s, min fill at completion %.3f, box px %zu non-white %zu, lit outside %zu",
                  descending && in_order ? "descending area" : "WRONG", min_fill, box_px, not_white, stray)};
}

Outcome false_positives() {
  const auto prof = default_rig();
  std::vector<DepthFrame> envf;
  for (std::uint64_t k = 0; k < 5; ++k) envf.push_back(render_depth(Scene{}, prof, 2.0, 9000 + k));
  const auto env = capture_environment(envf);
  std::size_t set = 0, total = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto m = denoise_mask(occupancy_mask(env, render_depth(Scene{}, prof, 2.0, k)), 1);
    set += popcount(m);
    total += m.size();
  }
  const double density = double(set) / double(total);
  return {density < 0.001, fmt("density %.2e over 50 frames (%zu px)", density, set)};
}

Outcome throughput() {
  auto measure = [](Session& s, const DepthFrame& f) {
    for (int i = 0; i < 3; ++i) s.process_frame(f);
    constexpr int n = 60;
    const auto t0 = Clock::now();
    for (int i = 0; i < n; ++i) s.process_frame(f);
    return n / std::chrono::duration<double>(Clock::now() - t0).count();
  };
  Session dom("d", {});
  dom.submit_sketch(oracle::load_fixture("straight_domino_sketch.json").get<SketchDocument>());
  Scene scene;
  const auto plan = dom.snapshot()->domino_plan;
  for (std::size_t i = 0; i < plan->targets.size(); i += 2) scene.objects.push_back({plan->footprint(i), 46});
  const double fd = measure(dom, render_depth(scene, default_rig(), 2.0, 1));

  SessionConfig bc;
  bc.task = Task::Bento;
  bc.params = BentoParams{};
  Session ben("b", bc);
  ben.submit_sketch(oracle::load_fixture("bento_sketch.json").get<SketchDocument>());
  Scene food;
  food.objects.push_back({{{{250, 150}, 0.0}, 50, 60}, 30});
  const double fb = measure(ben, render_depth(food, default_rig(), 2.0, 2));
  return {std::min(fd, fb) >= 30, fmt("domino %.1f fps, bento %.1f fps at 512x424", fd, fb)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"calibration: held-out RMS <= 0.5 px at 0.2 px noise, noiseless <= 1e-6", 1.0, calibration},
      {"sensing: occupancy bit-identical to brute force on 100 pairs, strict 8.0 mm", 10.0, sensing},
      {"domino planning: 11 targets, 28 mm +- 1e-6, no overlaps, all topple, arc 200 ok / 30 turn", 1.0, domino_planning},
      {"topple anchor: closed-form contact heights to 1e-9", 0.0, topple_anchor},
      {"feedback colors: red 25 / yellow 10 / green <= 5, continuous monotone ramp", 0.0, feedback},
      {"bento thresholds: 0.699/0 active, 0.700/0.199 complete, 0.700/0.200 active", 0.0, bento_thresholds},
      {"end-to-end domino: done, 11 green circles, deterministic report", 30.0, e2e_domino},
      {"end-to-end bento: descending-area completion, all-white box", 30.0, e2e_bento},
      {"false positives: empty scene density < 0.1% over 50 frames", 0.0, false_positives},
      {"throughput: process_frame >= 30 fps at 512x424", 0.0, throughput},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.ok = false;
      o.detail += fmt("; over %.0f s budget", c.budget_s);
    }
    failed += !o.ok;
    std::printf("%s  %s  [%s; %.3f s]\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
