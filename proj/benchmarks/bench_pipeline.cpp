#include <benchmark/benchmark.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "sketchcue/calibration.hpp"
#include "sketchcue/render.hpp"
#include "sketchcue/sensing.hpp"
#include "sketchcue/session.hpp"
#include "sketchcue/simulator.hpp"

using namespace sketchcue;

namespace {

SketchDocument fixture(const char* name) {
  std::ifstream in(std::string(SKETCHCUE_FIXTURES) + "/" + name);
  return nlohmann::json::parse(in).get<SketchDocument>();
}

}  // namespace

static void BM_ProcessFrameDomino(benchmark::State& st) {
  Session s("bench", {});
  s.submit_sketch(fixture("straight_domino_sketch.json"));
  const auto plan = s.snapshot()->domino_plan;
  Scene scene;
  for (std::size_t i = 0; i < plan->targets.size(); i += 2) scene.objects.push_back({plan->footprint(i), 46});
  const auto frame = render_depth(scene, default_rig(), 2.0, 1);
  for (auto _ : st) benchmark::DoNotOptimize(s.process_frame(frame));
}
BENCHMARK(BM_ProcessFrameDomino)->Unit(benchmark::kMillisecond);

static void BM_ProcessFrameBento(benchmark::State& st) {
  SessionConfig cfg;
  cfg.task = Task::Bento;
  cfg.params = BentoParams{};
  Session s("bench", cfg);
  s.submit_sketch(fixture("bento_sketch.json"));
  Scene food;
  food.objects.push_back({{{{250, 150}, 0.0}, 50, 60}, 30});
  const auto frame = render_depth(food, default_rig(), 2.0, 2);
  for (auto _ : st) benchmark::DoNotOptimize(s.process_frame(frame));
}
BENCHMARK(BM_ProcessFrameBento)->Unit(benchmark::kMillisecond);

static void BM_OccupancyDenoise(benchmark::State& st) {
  const auto prof = default_rig();
  std::vector<DepthFrame> env_frames{render_depth({}, prof, 2.0, 10), render_depth({}, prof, 2.0, 11),
                                     render_depth({}, prof, 2.0, 12)};
  const auto env = capture_environment(env_frames);
  const auto frame = render_depth({}, prof, 2.0, 3);
  for (auto _ : st) benchmark::DoNotOptimize(denoise_mask(occupancy_mask(env, frame), static_cast<int>(st.range(0))));
}
BENCHMARK(BM_OccupancyDenoise)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

static void BM_WarpToProjector(benchmark::State& st) {
  const auto prof = default_rig();
  RgbaImage cam(512, 424, colors::kWhite);
  for (auto _ : st) benchmark::DoNotOptimize(warp_image(cam, prof.proj_from_cam, 1280, 720));
}
BENCHMARK(BM_WarpToProjector)->Unit(benchmark::kMillisecond);

static void BM_HomographyDlt(benchmark::State& st) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 500);
  const auto prof = default_rig();
  std::vector<Correspondence> pairs;
  for (int i = 0; i < st.range(0); ++i) {
    const Point2 p{u(rng), u(rng)};
    pairs.push_back({p, prof.cam_from_workspace.apply(p)});
  }
  for (auto _ : st) benchmark::DoNotOptimize(homography_from_correspondences(pairs));
}
BENCHMARK(BM_HomographyDlt)->Arg(4)->Arg(8)->Arg(64);

BENCHMARK_MAIN();
