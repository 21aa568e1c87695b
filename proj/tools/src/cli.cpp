#include "sketchcue/cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sketchcue/codec.hpp"
#include "sketchcue/http_server.hpp"
#include "sketchcue/scenario.hpp"
#include "sketchcue/session.hpp"

namespace sketchcue {

namespace {

namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !out.write(contents.data(), static_cast<std::streamsize>(contents.size())))
    throw IoError("cannot write " + p.string());
}

nlohmann::json read_json(const fs::path& p) {
  const std::string text = read_file(p);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, p.string() + ": " + e.what());
  }
}

// Writes to the --out file when given, else to stdout.
void emit(const nlohmann::json& j, const std::string& out_path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    out << text;
  else
    write_file(out_path, text);
}

template <class T>
T json_as(const nlohmann::json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string(what) + ": " + e.what());
  }
}

std::vector<Correspondence> pin_list(const nlohmann::json& arr, const char* src_key) {
  std::vector<Correspondence> out;
  for (const auto& p : arr) out.push_back({p.at(src_key).get<Point2>(), p.at("cam").get<Point2>()});
  return out;
}

Task infer_task(const std::string& flag, const SketchDocument& doc) {
  if (flag == "domino") return Task::Domino;
  if (flag == "bento") return Task::Bento;
  for (const auto& e : doc.palette.entries())
    if (e.ingredient) return Task::Bento;
  return Task::Domino;
}

std::atomic<HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

CalibrationProfile calibrate_from_pins(const nlohmann::json& pins) {
  try {
    const auto proj_cam = pin_list(pins.at("proj_cam"), "proj");
    const auto ws_cam = pin_list(pins.at("workspace_cam"), "ws");
    Size2i cam = kDepthCameraDims, proj{1280, 720};
    Size2d ws = kWorkspaceDims;
    if (pins.contains("cam")) cam = {pins["cam"].at("w").get<int>(), pins["cam"].at("h").get<int>()};
    if (pins.contains("proj")) proj = {pins["proj"].at("w").get<int>(), pins["proj"].at("h").get<int>()};
    if (pins.contains("workspace_mm"))
      ws = {pins["workspace_mm"].at("w").get<double>(), pins["workspace_mm"].at("h").get<double>()};
    return calibrate(proj_cam, ws_cam, cam, proj, ws);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("pins: ") + e.what());
  }
}

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sketch-driven task guidance engine", "sketchcue"};
  app.require_subcommand(1);

  std::string calib_path, params_path, out_path, overlay_dir, task_flag = "auto", host = "127.0.0.1", data_dir;
  std::uint64_t seed = 0;
  int port = 8080;
  std::string input;

  auto* plan = app.add_subcommand("plan", "Sketch JSON to plan JSON");
  plan->add_option("sketch", input, "Sketch document")->required();
  plan->add_option("--task", task_flag, "domino, bento or auto")->check(CLI::IsMember({"auto", "domino", "bento"}));

  auto* calib = app.add_subcommand("calibrate", "Pins JSON to calibration JSON");
  calib->add_option("pins", input, "Pin correspondences")->required();

  auto* run = app.add_subcommand("run", "Scenario JSON to report JSON and overlay PNGs");
  run->add_option("scenario", input, "Scenario script")->required();
  run->add_option("--overlay-dir", overlay_dir, "Directory for per-frame overlay PNGs");
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");

  auto* serve = app.add_subcommand("serve", "Start the HTTP and streaming API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port, 0 for any")->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", data_dir, "Session persistence root");

  for (auto* sub : {plan, run, serve}) {
    sub->add_option("--calib", calib_path, "Calibration JSON");
    sub->add_option("--params", params_path, "Task parameter JSON");
  }
  for (auto* sub : {plan, calib, run}) sub->add_option("--out", out_path, "Output file (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitValidation;
  }

  try {
    std::optional<CalibrationProfile> profile;
    if (!calib_path.empty()) profile = json_as<CalibrationProfile>(read_json(calib_path), "calibration");
    std::optional<nlohmann::json> params;
    if (!params_path.empty()) params = read_json(params_path);

    if (*plan) {
      const auto doc = json_as<SketchDocument>(read_json(input), "sketch");
      SessionConfig cfg;
      cfg.task = infer_task(task_flag, doc);
      if (cfg.task == Task::Domino)
        cfg.params = params ? params->get<DominoParams>() : DominoParams{};
      else
        cfg.params = params ? params->get<BentoParams>() : BentoParams{};
      if (profile) cfg.calibration = *profile;
      cfg.source = FrameSource::External;
      Session session("plan", cfg);
      emit(session.submit_sketch(doc), out_path, out);
    } else if (*calib) {
      emit(calibrate_from_pins(read_json(input)), out_path, out);
    } else if (*run) {
      auto script = parse_scenario(read_json(input));
      if (seed_opt->count() > 0) script.seed = seed;
      if (script.sketch_path) {
        script.sketch = read_json(fs::path(input).parent_path() / *script.sketch_path);
        script.sketch_path.reset();
      }
      if (params) script.params = *params;
      SessionConfig base;
      if (profile) base.calibration = *profile;
      auto session = session_for_script(script, base);
      if (!overlay_dir.empty()) fs::create_directories(overlay_dir);
      const auto report = run_script(script, *session, [&](std::size_t i, const SessionSnapshot& s) {
        if (overlay_dir.empty() || !s.overlay) return;
        std::ostringstream name;
        name << "frame_" << std::setw(4) << std::setfill('0') << i << ".png";
        const auto png = encode_png(*s.overlay);
        write_file(fs::path(overlay_dir) / name.str(), std::string(png.begin(), png.end()));
      });
      emit(report, out_path, out);
      if (report["asserts"]["failed"].get<std::size_t>() > 0) {
        err << "sketchcue: " << report["asserts"]["failed"] << " assertion(s) failed\n";
        return kExitValidation;
      }
    } else if (*serve) {
      std::optional<fs::path> root;
      if (!data_dir.empty()) root = data_dir;
      SessionManager sessions(root);
      ServerOptions opts;
      opts.default_calibration = profile;
      HttpServer server(sessions, opts);
      const int bound = server.bind(host, port);
      if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
      err << "sketchcue: listening on http://" << host << ":" << bound << "\n";
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.serve();
      g_server = nullptr;
    }
  } catch (const IoError& e) {
    err << "sketchcue: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "sketchcue: " << e.what() << "\n";
    return kExitIo;
  } catch (const InfeasibleStrokeError& e) {
    err << "sketchcue: " << errc_name(e.code()) << ": " << e.what() << "\n"
        << nlohmann::json(e.report()).dump(2) << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "sketchcue: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "sketchcue: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace sketchcue
