#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "sketchcue/session.hpp"

namespace sketchcue {

// Maps an error code to the HTTP status the service answers with.
int http_status(Errc code) noexcept;

struct ServerOptions {
  // Keep-alive comment interval on idle streams.
  std::chrono::milliseconds stream_heartbeat{1000};
  int threads = 8;
  // Used for sessions whose config omits a calibration.
  std::optional<CalibrationProfile> default_calibration;
};

// POST /sessions                      config JSON (optional) -> {id}
// POST /sessions/{id}/sketch          SketchDocument JSON -> plan JSON
// POST /sessions/{id}/frames          SMHD bytes -> {dropped, state}
// GET  /sessions/{id}/state
// GET  /sessions/{id}/overlay.png
// GET  /sessions/{id}/stream          server-sent events of {state, overlay_b64};
//                                     ?max_events=N closes after N events
// POST /sessions/{id}/stream          simulator event or array of events -> state
class HttpServer {
 public:
  explicit HttpServer(SessionManager& sessions, ServerOptions options = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port, or -1. Pass port 0 for an ephemeral one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool serve();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sketchcue
