#include "sketchcue/http_server.hpp"

#include <atomic>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sketchcue/codec.hpp"

namespace sketchcue {

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::NotFound: return 404;
    case Errc::NotPlanned:
    case Errc::InvalidState: return 409;
    case Errc::InfeasibleStroke:
    case Errc::StrokeTooShort:
    case Errc::ResultDegenerate:
    case Errc::NoRegions:
    case Errc::MaskOutsideBox:
    case Errc::CalibrationRejected:
    case Errc::TooFewPoints:
    case Errc::DegenerateConfiguration:
    case Errc::EmptyTarget:
    case Errc::EmptyNonTarget: return 422;
    default: return 400;
  }
}

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, const nlohmann::json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  nlohmann::json body{{"error", errc_name(e.code())}, {"message", e.what()}};
  if (const auto* inf = dynamic_cast<const InfeasibleStrokeError*>(&e)) body["report"] = inf->report();
  send_json(res, body, http_status(e.code()));
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("body is not JSON: ") + e.what());
  }
}

std::string stream_event(const SessionSnapshot& s) {
  nlohmann::json j{{"state", state_json(s)}, {"overlay_b64", nullptr}};
  if (s.overlay) j["overlay_b64"] = base64_encode(encode_png(*s.overlay));
  return "data: " + j.dump() + "\n\n";
}

}  // namespace

struct HttpServer::Impl {
  SessionManager& sessions;
  ServerOptions options;
  httplib::Server svr;
  std::atomic<bool> stopping{false};

  Impl(SessionManager& s, ServerOptions o) : sessions(s), options(o) {}

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_json(res, {{"error", "Internal"}, {"message", e.what()}}, 500);
      }
    };
  }

  std::shared_ptr<Session> session(const httplib::Request& req) { return sessions.get(req.matches[1].str()); }

  void routes() {
    svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    svr.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto j = req.body.empty() ? nlohmann::json::object() : parse_body(req);
               if (j.is_object() && !j.contains("calibration") && options.default_calibration)
                 j["calibration"] = *options.default_calibration;
               send_json(res, {{"id", sessions.create(session_config_from_json(j))}}, 201);
             }));

    svr.Post(R"(/sessions/([^/]+)/sketch)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto s = session(req);
               SketchDocument doc;
               try {
                 doc = parse_body(req).get<SketchDocument>();
               } catch (const nlohmann::json::exception& e) {
                 throw Error(Errc::MalformedInput, e.what());
               }
               send_json(res, s->submit_sketch(doc));
             }));

    svr.Post(R"(/sessions/([^/]+)/frames)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto s = session(req);
               const auto* p = reinterpret_cast<const std::uint8_t*>(req.body.data());
               const auto frame = decode_depth_frame({p, req.body.size()});
               const auto r = s->process_frame(frame);
               send_json(res, {{"dropped", r.dropped}, {"state", state_json(*r.snapshot)}});
             }));

    svr.Get(R"(/sessions/([^/]+)/state)", guarded([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, state_json(*session(req)->snapshot()));
            }));

    svr.Get(R"(/sessions/([^/]+)/overlay\.png)", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const auto snap = session(req)->snapshot();
              if (!snap->overlay) throw Error(Errc::NotFound, "no frame has been processed yet");
              const auto png = encode_png(*snap->overlay);
              res.set_header("X-Overlay-Version", std::to_string(snap->overlay_version));
              res.set_content(std::string(png.begin(), png.end()), "image/png");
            }));

    svr.Post(R"(/sessions/([^/]+)/stream)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto s = session(req);
               const auto body = parse_body(req);
               nlohmann::json state;
               if (body.is_array()) {
                 for (const auto& e : body) state = s->apply_event(e);
                 if (body.empty()) state = state_json(*s->snapshot(), false);
               } else {
                 state = s->apply_event(body);
               }
               send_json(res, state);
             }));

    svr.Get(R"(/sessions/([^/]+)/stream)", guarded([this](const httplib::Request& req, httplib::Response& res) {
              auto s = session(req);
              long max_events = 0;
              if (req.has_param("max_events")) {
                try {
                  max_events = std::stol(req.get_param_value("max_events"));
                } catch (const std::exception&) {
                  throw Error(Errc::MalformedInput, "max_events must be an integer");
                }
              }
              struct Cursor {
                std::uint64_t version = 0;
                long sent = 0;
                bool first = true;
              };
              auto cur = std::make_shared<Cursor>();
              res.set_header("Cache-Control", "no-cache");
              res.set_chunked_content_provider(
                  "text/event-stream", [this, s, cur, max_events](std::size_t, httplib::DataSink& sink) {
                    if (stopping) {
                      sink.done();
                      return true;
                    }
                    const auto snap = cur->first ? s->snapshot() : s->wait_for_update(cur->version, options.stream_heartbeat);
                    std::string chunk;
                    if (cur->first || snap->version != cur->version) {
                      chunk = stream_event(*snap);
                      ++cur->sent;
                    } else {
                      chunk = ": ping\n\n";
                    }
                    cur->first = false;
                    cur->version = snap->version;
                    if (!sink.write(chunk.data(), chunk.size())) return false;
                    if (max_events > 0 && cur->sent >= max_events) sink.done();
                    return true;
                  });
            }));
  }
};

HttpServer::HttpServer(SessionManager& sessions, ServerOptions options)
    : impl_(std::make_unique<Impl>(sessions, options)) {
  const int threads = std::max(2, options.threads);
  impl_->svr.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->svr.bind_to_any_port(host);
  return impl_->svr.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->svr.listen_after_bind(); }

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->svr.stop();
}

bool HttpServer::running() const { return impl_->svr.is_running(); }

}  // namespace sketchcue
