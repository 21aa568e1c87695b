#include "sketchcue/scenario.hpp"

namespace sketchcue {

namespace {

[[noreturn]] void bad(std::size_t i, const std::string& msg) {
  throw Error(Errc::MalformedScript, "event " + std::to_string(i) + ": " + msg);
}

void check_event(std::size_t i, const nlohmann::json& e) {
  if (!e.is_object() || !e.contains("op") || !e.at("op").is_string()) bad(i, "needs a string 'op'");
  const std::string op = e.at("op").get<std::string>();
  if (op == "place") {
    try {
      (void)e.get<SceneObject>();
    } catch (const std::exception& ex) {
      bad(i, ex.what());
    }
  } else if (op == "remove") {
    if (!e.contains("index") || !e.at("index").is_number_integer()) bad(i, "remove needs an integer 'index'");
  } else if (op == "marker") {
    if (!e.value("up", false) && !(e.contains("x") && e.at("x").is_number() && e.contains("y") && e.at("y").is_number()))
      bad(i, "marker needs numeric x and y, or up:true");
  } else if (op == "assert") {
    if (!e.contains("path") || !e.at("path").is_string() || !e.contains("expect")) bad(i, "assert needs 'path' and 'expect'");
    try {
      (void)nlohmann::json::json_pointer(e.at("path").get<std::string>());
    } catch (const nlohmann::json::exception& ex) {
      bad(i, ex.what());
    }
  } else if (op != "frame") {
    bad(i, "unknown op '" + op + "'");
  }
}

std::uint64_t script_frame_seed(std::uint64_t seed, std::uint64_t n) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (n + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ScenarioScript parse_scenario(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::MalformedScript, "scenario must be an object");
  ScenarioScript s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("task")) {
      const auto t = j.at("task").get<std::string>();
      if (t == "domino")
        s.task = Task::Domino;
      else if (t == "bento")
        s.task = Task::Bento;
      else
        throw Error(Errc::MalformedScript, "task must be domino or bento");
    }
    if (j.contains("params")) s.params = j.at("params");
    if (j.contains("sketch")) {
      if (j.at("sketch").is_string())
        s.sketch_path = j.at("sketch").get<std::string>();
      else
        s.sketch = j.at("sketch");
    }
    const auto& events = j.value("events", nlohmann::json::array());
    if (!events.is_array()) throw Error(Errc::MalformedScript, "events must be an array");
    for (std::size_t i = 0; i < events.size(); ++i) {
      check_event(i, events[i]);
      s.events.push_back(events[i]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedScript, std::string("scenario: ") + e.what());
  }
  return s;
}

std::unique_ptr<Session> session_for_script(const ScenarioScript& script, SessionConfig base) {
  if (script.task && *script.task != base.task) {
    base.task = *script.task;
    if (base.task == Task::Domino)
      base.params = DominoParams{};
    else
      base.params = BentoParams{};
  }
  if (script.params) {
    if (base.task == Task::Domino)
      base.params = script.params->get<DominoParams>();
    else
      base.params = script.params->get<BentoParams>();
  }
  base.seed = script.seed;
  base.source = FrameSource::Simulator;
  auto session = std::make_unique<Session>("scenario", std::move(base));
  if (script.sketch) {
    SketchDocument doc;
    try {
      doc = script.sketch->get<SketchDocument>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedInput, std::string("sketch: ") + e.what());
    }
    session->submit_sketch(doc);
  }
  return session;
}

nlohmann::json run_script(const ScenarioScript& script, Session& session, const FrameCallback& on_frame) {
  nlohmann::json events = nlohmann::json::array();
  std::size_t passed = 0, failed = 0, frames = 0;
  for (std::size_t i = 0; i < script.events.size(); ++i) {
    const auto& e = script.events[i];
    const std::string op = e.at("op").get<std::string>();
    nlohmann::json rec{{"index", i}, {"op", op}};
    if (op == "assert") {
      const auto state = state_json(*session.snapshot(), false);
      const nlohmann::json::json_pointer ptr(e.at("path").get<std::string>());
      const nlohmann::json actual = state.contains(ptr) ? state.at(ptr) : nlohmann::json();
      const bool ok = actual == e.at("expect");
      (ok ? passed : failed) += 1;
      rec["path"] = e.at("path");
      rec["expect"] = e.at("expect");
      rec["actual"] = actual;
      rec["passed"] = ok;
    } else {
      nlohmann::json ev = e;
      if (op == "frame") ev["seed"] = script_frame_seed(script.seed, frames);
      try {
        rec["state"] = session.apply_event(ev);
      } catch (const Error& err) {
        if (err.code() == Errc::MalformedInput) bad(i, err.what());
        throw;
      }
      if (op == "frame") {
        if (on_frame) on_frame(frames, *session.snapshot());
        ++frames;
      }
    }
    events.push_back(std::move(rec));
  }
  return {{"seed", script.seed},
          {"events", std::move(events)},
          {"asserts", {{"passed", passed}, {"failed", failed}}},
          {"frames", frames},
          {"final_state", state_json(*session.snapshot(), false)}};
}

}  // namespace sketchcue
