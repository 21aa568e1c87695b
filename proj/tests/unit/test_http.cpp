#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "oracles.hpp"
#include "sketchcue/codec.hpp"
#include "sketchcue/http_server.hpp"

using namespace sketchcue;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServerOptions opts;
    opts.stream_heartbeat = std::chrono::milliseconds(50);
    server_ = std::make_unique<HttpServer>(sessions_, opts);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->serve(); });
    for (int i = 0; i < 200 && !server_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  void TearDown() override {
    server_->stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(20, 0);
    return c;
  }

  std::string create(const nlohmann::json& cfg = nlohmann::json::object()) {
    auto r = client().Post("/sessions", cfg.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 201);
    return nlohmann::json::parse(r->body).at("id").get<std::string>();
  }

  SessionManager sessions_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  int port_ = 0;
};

std::string frame_bytes(const DepthFrame& f) {
  const auto b = encode_depth_frame(f);
  return {b.begin(), b.end()};
}

}  // namespace

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(Errc::NotFound), 404);
  EXPECT_EQ(http_status(Errc::NotPlanned), 409);
  EXPECT_EQ(http_status(Errc::InvalidState), 409);
  EXPECT_EQ(http_status(Errc::InfeasibleStroke), 422);
  EXPECT_EQ(http_status(Errc::MaskOutsideBox), 422);
  EXPECT_EQ(http_status(Errc::MalformedInput), 400);
  EXPECT_EQ(http_status(Errc::InvalidConfig), 400);
}

TEST_F(HttpTest, DominoRoundTrip) {
  const auto id = create();
  auto c = client();

  auto st = c.Get("/sessions/" + id + "/state");
  ASSERT_TRUE(st);
  EXPECT_EQ(st->status, 200);
  EXPECT_EQ(nlohmann::json::parse(st->body).at("phase"), "awaiting-sketch");

  auto nf = c.Post("/sessions/" + id + "/frames", frame_bytes(render_depth({}, default_rig(), 0)), "application/octet-stream");
  ASSERT_TRUE(nf);
  EXPECT_EQ(nf->status, 409);
  EXPECT_EQ(nlohmann::json::parse(nf->body).at("error"), "NotPlanned");

  auto ov0 = c.Get("/sessions/" + id + "/overlay.png");
  ASSERT_TRUE(ov0);
  EXPECT_EQ(ov0->status, 404);

  const auto sketch = oracle::load_fixture("straight_domino_sketch.json");
  auto pl = c.Post("/sessions/" + id + "/sketch", sketch.dump(), "application/json");
  ASSERT_TRUE(pl);
  ASSERT_EQ(pl->status, 200) << pl->body;
  const auto plan = nlohmann::json::parse(pl->body).get<DominoPlan>();
  ASSERT_EQ(plan.targets.size(), 11u);

  Scene scene;
  for (std::size_t i = 0; i < plan.targets.size(); ++i) scene.objects.push_back({plan.footprint(i), 46});
  auto fr = c.Post("/sessions/" + id + "/frames", frame_bytes(render_depth(scene, default_rig(), 2.0, 1)),
                   "application/octet-stream");
  ASSERT_TRUE(fr);
  ASSERT_EQ(fr->status, 200) << fr->body;
  const auto fj = nlohmann::json::parse(fr->body);
  EXPECT_EQ(fj.at("dropped"), false);
  EXPECT_EQ(fj.at("state").at("phase"), "done");
  EXPECT_EQ(fj.at("state").at("guidance").at("green"), 11);

  auto ov = c.Get("/sessions/" + id + "/overlay.png");
  ASSERT_TRUE(ov);
  EXPECT_EQ(ov->status, 200);
  EXPECT_EQ(ov->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(ov->get_header_value("X-Overlay-Version"), "1");
  const auto img = decode_png(std::vector<std::uint8_t>(ov->body.begin(), ov->body.end()));
  EXPECT_EQ(img.width(), 1280);
  EXPECT_EQ(img.height(), 720);
  EXPECT_EQ(img, *sessions_.get(id)->snapshot()->overlay);
}

TEST_F(HttpTest, ErrorStatuses) {
  auto c = client();
  auto r = c.Get("/sessions/s999/state");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(nlohmann::json::parse(r->body).at("error"), "NotFound");

  r = c.Post("/sessions", R"({"task":"knitting"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  r = c.Post("/sessions", "{broken", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);

  const auto id = create();
  r = c.Post("/sessions/" + id + "/frames", "SMHDxx", "application/octet-stream");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);

  // Tight circle sketch: infeasible, report attached.
  nlohmann::json doc{{"canvas", {{"w", 572}, {"h", 321}}}, {"palette", {{{"id", 0}, {"rgb", {0, 0, 0}}}}}};
  nlohmann::json pts = nlohmann::json::array();
  for (int i = 0; i <= 90; ++i) pts.push_back({286 + 30 * std::cos(3.0 * i / 90), 160 + 30 * std::sin(3.0 * i / 90)});
  doc["strokes"] = {{{"color", 0}, {"width", 4}, {"pts", pts}}};
  r = c.Post("/sessions/" + id + "/sketch", doc.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 422);
  const auto body = nlohmann::json::parse(r->body);
  EXPECT_EQ(body.at("error"), "InfeasibleStroke");
  EXPECT_TRUE(body.contains("report"));

  const auto bento = create({{"task", "bento"}});
  auto wrong = oracle::load_fixture("straight_domino_sketch.json");
  r = c.Post("/sessions/" + bento + "/sketch", wrong.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(nlohmann::json::parse(r->body).at("error"), "DimMismatch");

  r = c.Get("/sessions/" + id + "/stream?max_events=abc");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST_F(HttpTest, StreamEventsAndSimulatorPosts) {
  const auto id = create({{"seed", 4}});
  auto c = client();
  auto r = c.Post("/sessions/" + id + "/sketch", oracle::load_fixture("straight_domino_sketch.json").dump(),
                  "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);

  std::vector<nlohmann::json> events;
  std::string buffer;
  std::thread reader([&] {
    auto rc = client();
    rc.Get("/sessions/" + id + "/stream?max_events=3", [&](const char* data, std::size_t n) {
      buffer.append(data, n);
      std::size_t pos;
      while ((pos = buffer.find("\n\n")) != std::string::npos) {
        const std::string msg = buffer.substr(0, pos);
        buffer.erase(0, pos + 2);
        if (msg.rfind("data: ", 0) == 0) events.push_back(nlohmann::json::parse(msg.substr(6)));
      }
      return true;
    });
  });

  // Let the stream deliver its initial event before changing state.
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  const auto plan = sessions_.get(id)->snapshot()->domino_plan;
  const auto& t = plan->targets[2];
  nlohmann::json batch = nlohmann::json::array();
  batch.push_back({{"op", "place"}, {"rect", {{"x", t.center.x}, {"y", t.center.y}, {"theta", t.theta}, {"w", 23}, {"t", 8}}}, {"height", 46}});
  batch.push_back({{"op", "frame"}});
  r = c.Post("/sessions/" + id + "/stream", batch.dump(), "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(nlohmann::json::parse(r->body).at("guidance").at("green"), 1);
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  r = c.Post("/sessions/" + id + "/stream", nlohmann::json{{"op", "frame"}}.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  reader.join();

  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0].at("state").at("phase"), "planned");
  EXPECT_FALSE(events[0].contains("overlay_b64") && !events[0].at("overlay_b64").is_null());
  const auto& last = events.back();
  EXPECT_EQ(last.at("state").at("frames").at("processed").get<int>() >= 1, true);
  ASSERT_TRUE(last.at("overlay_b64").is_string());
  const auto png = base64_decode(last.at("overlay_b64").get<std::string>());
  EXPECT_EQ(decode_png(png).width(), 1280);

  r = c.Post("/sessions/" + id + "/stream", R"({"op":"teleport"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST_F(HttpTest, HeartbeatOnIdleStream) {
  const auto id = create();
  std::string body;
  auto c = client();
  std::thread poke([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    client().Post("/sessions/" + id + "/sketch", oracle::load_fixture("straight_domino_sketch.json").dump(),
                  "application/json");
  });
  c.Get("/sessions/" + id + "/stream?max_events=2", [&](const char* d, std::size_t n) {
    body.append(d, n);
    return true;
  });
  poke.join();
  EXPECT_NE(body.find(": ping"), std::string::npos);
  EXPECT_NE(body.find("\"planned\""), std::string::npos);
}
