#include "sketchcue/session.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "sketchcue/codec.hpp"

namespace sketchcue {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t frame_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t n) {
  return splitmix(splitmix(base ^ stream) + n);
}

constexpr std::uint64_t kEnvStream = 0x656e76;
constexpr std::uint64_t kFrameStream = 0x66726d;

Stroke longest_stroke(const SketchDocument& doc) {
  if (doc.strokes.empty()) throw Error(Errc::EmptyInput, "domino sketch has no strokes");
  return *std::max_element(doc.strokes.begin(), doc.strokes.end(),
                           [](const Stroke& a, const Stroke& b) { return a.arc_length() < b.arc_length(); });
}

}  // namespace

std::string_view task_name(Task t) { return t == Task::Domino ? "domino" : "bento"; }

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::AwaitingSketch: return "awaiting-sketch";
    case Phase::Planned: return "planned";
    case Phase::Running: return "running";
    case Phase::Done: return "done";
  }
  return "unknown";
}

void SessionConfig::validate() const {
  const bool domino = std::holds_alternative<DominoParams>(params);
  if (domino != (task == Task::Domino)) throw Error(Errc::InvalidConfig, "params do not match the session task");
  std::visit([](const auto& p) { p.validate(); }, params);
  if (env_frames < 1) throw Error(Errc::InvalidConfig, "env_frames must be >= 1");
  if (!(noise_sigma_mm >= 0)) throw Error(Errc::InvalidConfig, "noise_sigma_mm must be >= 0");
  if (denoise_radius < 0) throw Error(Errc::InvalidConfig, "denoise_radius must be >= 0");
  if (render.supersample < 1 || render.supersample > 8) throw Error(Errc::InvalidConfig, "supersample must be in [1, 8]");
  if (calibration.cam_dims.w <= 0 || calibration.cam_dims.h <= 0 || calibration.proj_dims.w <= 0 ||
      calibration.proj_dims.h <= 0)
    throw Error(Errc::InvalidConfig, "calibration dimensions must be positive");
}

SessionConfig session_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "session config must be an object");
  static const std::set<std::string> known{"task",         "params",         "calibration",    "source",    "seed",
                                           "env_frames",   "noise_sigma_mm", "denoise_radius", "supersample"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(Errc::InvalidConfig, "unknown session field '" + key + "'");

  SessionConfig c;
  try {
    const std::string task = j.value("task", "domino");
    if (task == "domino")
      c.task = Task::Domino;
    else if (task == "bento")
      c.task = Task::Bento;
    else
      throw Error(Errc::InvalidConfig, "task must be domino or bento");

    if (c.task == Task::Domino)
      c.params = j.contains("params") ? j.at("params").get<DominoParams>() : DominoParams{};
    else
      c.params = j.contains("params") ? j.at("params").get<BentoParams>() : BentoParams{};

    if (j.contains("calibration")) {
      try {
        c.calibration = j.at("calibration").get<CalibrationProfile>();
      } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.what());
      }
    }
    const std::string source = j.value("source", "simulator");
    if (source == "simulator")
      c.source = FrameSource::Simulator;
    else if (source == "external")
      c.source = FrameSource::External;
    else
      throw Error(Errc::InvalidConfig, "source must be simulator or external");

    c.seed = j.value("seed", std::uint64_t{0});
    c.env_frames = j.value("env_frames", c.env_frames);
    c.noise_sigma_mm = j.value("noise_sigma_mm", c.noise_sigma_mm);
    c.denoise_radius = j.value("denoise_radius", c.denoise_radius);
    c.render.supersample = j.value("supersample", c.render.supersample);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("session config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json state_json(const SessionSnapshot& s, bool include_timing) {
  nlohmann::json j{{"id", s.id},
                   {"task", task_name(s.task)},
                   {"phase", phase_name(s.phase)},
                   {"frames", {{"processed", s.processed}, {"dropped", s.dropped}, {"total", s.processed + s.dropped}}},
                   {"overlay_version", s.overlay_version},
                   {"environment_ready", s.environment_ready}};
  if (s.domino_plan) j["targets"] = s.domino_plan->targets.size();
  if (s.bento_plan) j["subtasks"] = s.bento_plan->subtasks.size();
  if (s.domino) {
    nlohmann::json det = nlohmann::json::array();
    for (const auto& d : s.domino->detections)
      det.push_back({{"x", d.pose.center.x},
                     {"y", d.pose.center.y},
                     {"theta", d.pose.theta},
                     {"area_px", d.area_px},
                     {"height", d.height_mm}});
    j["guidance"] = {{"detections", std::move(det)}, {"assignment", s.domino->assignment}, {"green", s.domino->green}};
  }
  if (s.bento) {
    j["guidance"] = *s.bento;
    if (s.bento_plan) {
      nlohmann::json order = nlohmann::json::array();
      for (const auto& t : s.bento_plan->subtasks) order.push_back(t.ingredient);
      j["guidance"]["order"] = std::move(order);
    }
  }
  if (s.marker_mm) j["marker"] = *s.marker_mm;
  if (include_timing) j["latency_ms"] = s.last_latency_ms;
  return j;
}

Session::Session(std::string id, SessionConfig config, std::optional<std::filesystem::path> dir)
    : id_(std::move(id)), config_(std::move(config)), dir_(std::move(dir)) {
  config_.validate();
  SessionSnapshot s;
  s.id = id_;
  s.task = config_.task;

  if (config_.source == FrameSource::Simulator) {
    std::vector<DepthFrame> frames;
    for (int k = 0; k < config_.env_frames; ++k)
      frames.push_back(render_depth(scene_, config_.calibration, config_.noise_sigma_mm,
                                    frame_seed(config_.seed, kEnvStream, static_cast<std::uint64_t>(k))));
    env_ = capture_environment(frames);
    s.environment_ready = true;
  }
  snap_ = std::make_shared<const SessionSnapshot>(std::move(s));

  if (dir_) {
    std::filesystem::create_directories(*dir_);
    nlohmann::json cj{{"task", task_name(config_.task)},
                      {"calibration", config_.calibration},
                      {"source", config_.source == FrameSource::Simulator ? "simulator" : "external"},
                      {"seed", config_.seed},
                      {"env_frames", config_.env_frames},
                      {"noise_sigma_mm", config_.noise_sigma_mm},
                      {"denoise_radius", config_.denoise_radius},
                      {"supersample", config_.render.supersample}};
    std::visit([&](const auto& p) { cj["params"] = p; }, config_.params);
    persist("config.json", cj.dump(2));
  }
}

std::shared_ptr<const SessionSnapshot> Session::snapshot() const {
  std::lock_guard lk(snap_mu_);
  return snap_;
}

void Session::publish(SessionSnapshot next) {
  {
    std::lock_guard lk(snap_mu_);
    next.dropped = snap_->dropped;
    next.version = snap_->version + 1;
    snap_ = std::make_shared<const SessionSnapshot>(std::move(next));
  }
  snap_cv_.notify_all();
}

std::shared_ptr<const SessionSnapshot> Session::wait_for_update(std::uint64_t seen,
                                                                std::chrono::milliseconds timeout) const {
  std::unique_lock lk(snap_mu_);
  snap_cv_.wait_for(lk, timeout, [&] { return snap_->version > seen; });
  return snap_;
}

void Session::persist(const std::string& name, const std::string& contents) const {
  if (!dir_) return;
  const auto tmp = *dir_ / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(Errc::InvalidState, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  }
  std::filesystem::rename(tmp, *dir_ / name);
}

nlohmann::json Session::submit_sketch(const SketchDocument& doc) {
  std::lock_guard work(work_mu_);
  return submit_locked(doc);
}

nlohmann::json Session::submit_locked(const SketchDocument& doc) {
  if (const auto* bp = std::get_if<BentoParams>(&config_.params);
      bp && (doc.canvas_w != bp->canvas_w || doc.canvas_h != bp->canvas_h))
    throw Error(Errc::DimMismatch, "bento sketch canvas must be " + std::to_string(bp->canvas_w) + "x" +
                                       std::to_string(bp->canvas_h));
  doc.validate();
  SessionSnapshot next = *snapshot();
  next.domino.reset();
  next.bento.reset();
  next.domino_plan.reset();
  next.bento_plan.reset();
  bento_state_.reset();

  nlohmann::json plan_json;
  if (config_.task == Task::Domino) {
    const auto& params = std::get<DominoParams>(config_.params);
    const double px_per_mm = doc.canvas_w / config_.calibration.workspace_dims.w;
    const Stroke mm = clean_stroke(longest_stroke(doc), px_per_mm, params);
    auto plan = std::make_shared<const DominoPlan>(plan_dominoes(mm, params));
    plan_json = *plan;
    next.domino_plan = std::move(plan);
  } else {
    const auto& params = std::get<BentoParams>(config_.params);
    const auto regions = extract_color_regions(document_labels(doc));
    auto plan = std::make_shared<const BentoPlan>(build_bento_plan(regions, params, config_.calibration, doc.palette));
    bento_state_ = initial_bento_state(*plan);
    next.bento = bento_state_;
    plan_json = *plan;
    next.bento_plan = std::move(plan);
  }
  next.phase = Phase::Planned;
  publish(std::move(next));

  if (dir_) {
    persist("sketch.json", nlohmann::json(doc).dump());
    persist("plan.json", plan_json.dump());
  }
  return plan_json;
}

void Session::set_environment(EnvironmentMap env) {
  std::lock_guard work(work_mu_);
  if (env.baseline_mm.width() != config_.calibration.cam_dims.w ||
      env.baseline_mm.height() != config_.calibration.cam_dims.h || !env.valid.same_dims(env.baseline_mm))
    throw Error(Errc::DimMismatch, "environment map does not match the depth camera");
  env_ = std::move(env);
  env_buffer_.clear();
  SessionSnapshot next = *snapshot();
  next.environment_ready = true;
  publish(std::move(next));
}

FrameResult Session::process_frame(const DepthFrame& frame) {
  std::unique_lock work(work_mu_, std::try_to_lock);
  if (!work.owns_lock()) {
    {
      std::lock_guard lk(snap_mu_);
      auto next = std::make_shared<SessionSnapshot>(*snap_);
      ++next->dropped;
      ++next->version;
      snap_ = std::move(next);
    }
    snap_cv_.notify_all();
    return {true, snapshot()};
  }
  return {false, process_locked(frame)};
}

std::shared_ptr<const SessionSnapshot> Session::process_locked(const DepthFrame& frame) {
  const auto t0 = std::chrono::steady_clock::now();
  if (frame.width() != config_.calibration.cam_dims.w || frame.height() != config_.calibration.cam_dims.h)
    throw Error(Errc::DimMismatch, "frame is " + std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                                       ", camera is " + std::to_string(config_.calibration.cam_dims.w) + "x" +
                                       std::to_string(config_.calibration.cam_dims.h));
  SessionSnapshot next = *snapshot();
  if (next.phase == Phase::AwaitingSketch) throw Error(Errc::NotPlanned, "no sketch has been submitted");

  // External sources: the first env_frames frames are taken as the empty desk.
  OccupancyMask occ(frame.width(), frame.height(), 0);
  if (!env_) {
    env_buffer_.push_back(frame);
    if (static_cast<int>(env_buffer_.size()) >= config_.env_frames) {
      env_ = capture_environment(env_buffer_);
      env_buffer_.clear();
      next.environment_ready = true;
    }
  } else {
    occ = denoise_mask(occupancy_mask(*env_, frame), config_.denoise_radius);
  }

  GuidanceImage overlay;
  if (config_.task == Task::Domino) {
    const DominoPlan& plan = *next.domino_plan;
    DominoGuidance g;
    if (next.environment_ready)
      g.detections = detect_blocks(occ, config_.calibration, plan.params.footprint_mm2(), 0.5, &*env_, &frame);
    g.assignment = match_detections(plan, g.detections);
    g.green = static_cast<std::size_t>(std::count_if(g.assignment.pairs.begin(), g.assignment.pairs.end(),
                                                     [&](const Match& m) { return m.distance <= plan.params.correct_mm; }));
    overlay = render_domino_overlay(plan, g.assignment, g.detections, config_.calibration, config_.render);
    const bool complete = g.green == plan.targets.size();
    next.domino = std::move(g);
    if (next.phase != Phase::Done) next.phase = complete ? Phase::Done : Phase::Running;
  } else {
    const BentoPlan& plan = *next.bento_plan;
    bento_state_ = step_bento_state(*bento_state_, plan, occ);
    overlay = render_bento_overlay(plan, *bento_state_, occ, config_.calibration);
    next.bento = bento_state_;
    if (next.phase != Phase::Done) next.phase = bento_state_->all_complete ? Phase::Done : Phase::Running;
  }

  ++next.processed;
  next.overlay = std::make_shared<const GuidanceImage>(std::move(overlay));
  next.overlay_version = next.processed;
  next.last_latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  publish(std::move(next));
  auto out = snapshot();

  if (dir_) {
    const auto bytes = encode_depth_frame(frame);
    persist("last_frame.smhd", std::string(bytes.begin(), bytes.end()));
    const auto png = encode_png(*out->overlay);
    persist("overlay.png", std::string(png.begin(), png.end()));
    persist("state.json", state_json(*out).dump(2));
  }
  return out;
}

nlohmann::json Session::apply_event(const nlohmann::json& event) {
  if (config_.source != FrameSource::Simulator)
    throw Error(Errc::InvalidState, "simulator events need a simulator-source session");
  if (!event.is_object() || !event.contains("op") || !event.at("op").is_string())
    throw Error(Errc::MalformedInput, "event needs a string 'op'");
  std::lock_guard work(work_mu_);
  const std::string op = event.at("op").get<std::string>();
  try {
    if (op == "place") {
      SceneObject obj = event.get<SceneObject>();
      scene_.objects.push_back(obj);
    } else if (op == "remove") {
      const auto index = event.at("index").get<std::int64_t>();
      if (index < 0 || static_cast<std::size_t>(index) >= scene_.objects.size())
        throw Error(Errc::MalformedInput, "remove index " + std::to_string(index) + " out of range");
      scene_.objects.erase(scene_.objects.begin() + index);
    } else if (op == "marker") {
      if (event.value("up", false)) {
        scene_.marker.reset();
        if (pen_stroke_.size() < 2) throw Error(Errc::StrokeTooShort, "pen stroke has fewer than 2 points");
        if (config_.task != Task::Domino) throw Error(Errc::InvalidState, "pen drawing supports the domino task");
        // The pen draws in workspace mm, so the canvas is the workspace at 1 px/mm.
        SketchDocument doc;
        doc.canvas_w = static_cast<int>(config_.calibration.workspace_dims.w);
        doc.canvas_h = static_cast<int>(config_.calibration.workspace_dims.h);
        doc.palette = Palette::domino();
        doc.strokes.push_back(Stroke{pen_stroke_, 0});
        pen_stroke_.clear();
        submit_locked(doc);
      } else {
        scene_.marker = Point2{event.at("x").get<double>(), event.at("y").get<double>()};
        const auto px = detect_marker(render_ir(scene_, config_.calibration));
        SessionSnapshot next = *snapshot();
        next.marker_mm.reset();
        if (px) {
          const Point2 mm = camera_to_workspace(config_.calibration, *px);
          pen_stroke_.push_back(mm);
          next.marker_mm = mm;
        }
        publish(std::move(next));
      }
    } else if (op == "frame") {
      const std::uint64_t seed = event.contains("seed") ? event.at("seed").get<std::uint64_t>()
                                                        : frame_seed(config_.seed, kFrameStream, sim_frames_);
      ++sim_frames_;
      process_locked(render_depth(scene_, config_.calibration, config_.noise_sigma_mm, seed, sim_frames_));
    } else {
      throw Error(Errc::MalformedInput, "unknown event op '" + op + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, "event '" + op + "': " + e.what());
  }
  return state_json(*snapshot(), false);
}

std::string SessionManager::create(SessionConfig config) {
  config.validate();
  std::lock_guard lk(mu_);
  const std::string id = "s" + std::to_string(next_id_++);
  std::optional<std::filesystem::path> dir;
  if (root_) dir = *root_ / id;
  sessions_.emplace(id, std::make_shared<Session>(id, std::move(config), std::move(dir)));
  return id;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lk(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::NotFound, "no session '" + id + "'");
  return it->second;
}

std::size_t SessionManager::size() const {
  std::lock_guard lk(mu_);
  return sessions_.size();
}

}  // namespace sketchcue
