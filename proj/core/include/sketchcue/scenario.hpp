#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sketchcue/session.hpp"

namespace sketchcue {

// {seed, events:[{op:"place", rect:{x,y,theta,w,t}, height}, {op:"remove", index},
//  {op:"frame"}, {op:"marker", x, y} | {op:"marker", up:true}, {op:"assert", path, expect}]}
// Optional header fields describe the session the script expects: task,
// params, and the sketch (inline document or a path relative to the script).
struct ScenarioScript {
  std::uint64_t seed = 0;
  std::vector<nlohmann::json> events;
  std::optional<Task> task;
  std::optional<nlohmann::json> params;
  std::optional<nlohmann::json> sketch;
  std::optional<std::string> sketch_path;
};

ScenarioScript parse_scenario(const nlohmann::json& j);  // throws MalformedScript

// Session configured from the script header (task, params, seed) with the
// sketch submitted when the script carries one.
std::unique_ptr<Session> session_for_script(const ScenarioScript& script, SessionConfig base = {});

using FrameCallback = std::function<void(std::size_t frame_index, const SessionSnapshot& snapshot)>;

// Runs the events against a simulator-source session. Assertion failures are
// recorded in the report; an event that cannot execute throws MalformedScript.
// The report carries no timing and is byte-deterministic for a given seed.
nlohmann::json run_script(const ScenarioScript& script, Session& session, const FrameCallback& on_frame = {});

}  // namespace sketchcue
