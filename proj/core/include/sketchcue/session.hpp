#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sketchcue/bento.hpp"
#include "sketchcue/calibration.hpp"
#include "sketchcue/domino.hpp"
#include "sketchcue/render.hpp"
#include "sketchcue/sensing.hpp"
#include "sketchcue/simulator.hpp"
#include "sketchcue/sketch.hpp"

namespace sketchcue {

enum class Task { Domino, Bento };
enum class FrameSource { Simulator, External };
enum class Phase { AwaitingSketch, Planned, Running, Done };

std::string_view task_name(Task t);
std::string_view phase_name(Phase p);

struct SessionConfig {
  Task task = Task::Domino;
  std::variant<DominoParams, BentoParams> params = DominoParams{};
  CalibrationProfile calibration = default_rig();
  FrameSource source = FrameSource::Simulator;
  std::uint64_t seed = 0;
  // Empty-desk frames averaged into the environment map.
  int env_frames = 5;
  double noise_sigma_mm = kDefaultNoiseSigmaMm;
  int denoise_radius = 1;
  RenderOptions render;

  void validate() const;  // throws InvalidConfig
};

// Missing fields take defaults; params must match the task.
SessionConfig session_config_from_json(const nlohmann::json& j);

struct DominoGuidance {
  std::vector<DetectedBlock> detections;
  Assignment assignment;
  std::size_t green = 0;  // matches within correct_mm
};

// Immutable view of a session published after every state change.
struct SessionSnapshot {
  std::string id;
  Task task = Task::Domino;
  Phase phase = Phase::AwaitingSketch;
  std::shared_ptr<const DominoPlan> domino_plan;
  std::shared_ptr<const BentoPlan> bento_plan;
  std::optional<DominoGuidance> domino;
  std::optional<BentoState> bento;
  std::shared_ptr<const GuidanceImage> overlay;
  std::uint64_t overlay_version = 0;  // equals the processed-frame count that produced it
  std::uint64_t processed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t version = 0;  // bumps on every publish
  bool environment_ready = false;
  double last_latency_ms = 0.0;
  std::optional<Point2> marker_mm;
};

// Full state as JSON. Timing fields are omitted unless requested so that
// scenario reports stay byte-deterministic.
nlohmann::json state_json(const SessionSnapshot& s, bool include_timing = true);

struct FrameResult {
  bool dropped = false;
  std::shared_ptr<const SessionSnapshot> snapshot;
};

class Session {
 public:
  Session(std::string id, SessionConfig config, std::optional<std::filesystem::path> dir = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  const SessionConfig& config() const noexcept { return config_; }

  std::shared_ptr<const SessionSnapshot> snapshot() const;

  // Cleans and plans the sketch; replaces any previous plan and guidance.
  // Returns the plan JSON.
  nlohmann::json submit_sketch(const SketchDocument& doc);

  // Latest-wins: a frame arriving while another is in the pipeline is
  // dropped and counted.
  FrameResult process_frame(const DepthFrame& frame);

  void set_environment(EnvironmentMap env);

  // Simulator-source sessions only: {op: place|remove|marker|frame, ...}.
  // Returns the resulting state JSON (without timing).
  nlohmann::json apply_event(const nlohmann::json& event);

  // Blocks until the snapshot version exceeds `seen` or the timeout passes.
  std::shared_ptr<const SessionSnapshot> wait_for_update(std::uint64_t seen, std::chrono::milliseconds timeout) const;

  const Scene& scene() const noexcept { return scene_; }

 private:
  nlohmann::json submit_locked(const SketchDocument& doc);
  std::shared_ptr<const SessionSnapshot> process_locked(const DepthFrame& frame);
  void publish(SessionSnapshot next);
  void persist(const std::string& name, const std::string& contents) const;

  const std::string id_;
  const SessionConfig config_;
  const std::optional<std::filesystem::path> dir_;

  // Serializes the pipeline; frames use try_lock for latest-wins dropping.
  std::mutex work_mu_;
  std::optional<EnvironmentMap> env_;
  std::vector<DepthFrame> env_buffer_;
  std::optional<BentoState> bento_state_;
  Scene scene_;
  std::vector<Point2> pen_stroke_;
  std::uint64_t sim_frames_ = 0;

  mutable std::mutex snap_mu_;
  mutable std::condition_variable snap_cv_;
  std::shared_ptr<const SessionSnapshot> snap_;
};

class SessionManager {
 public:
  explicit SessionManager(std::optional<std::filesystem::path> root = std::nullopt) : root_(std::move(root)) {}

  std::string create(SessionConfig config);
  std::shared_ptr<Session> get(const std::string& id) const;  // throws NotFound
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> root_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace sketchcue
