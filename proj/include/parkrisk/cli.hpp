// Copyright 2026 The parkrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PARKRISK__CLI_HPP_
#define PARKRISK__CLI_HPP_

#include "parkrisk/config.hpp"
#include "parkrisk/dras.hpp"
#include "parkrisk/errors.hpp"
#include "parkrisk/ingest.hpp"
#include "parkrisk/ldm.hpp"
#include "parkrisk/reporting.hpp"
#include "parkrisk/risk.hpp"
#include "parkrisk/server.hpp"
#include "parkrisk/simulator.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace parkrisk::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Options shared by every subcommand.
struct CliConfig
{
  std::string config_path;
  std::uint64_t seed{42};
  std::string out;
  bool show_config{false};
  std::optional<double> speed_kmh;
  std::optional<double> reaction_s;
  int verbosity{0};

  PipelineConfig resolve() const
  {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (speed_kmh) {
      c.params.reverse_speed = risk::kmh_to_mps(*speed_kmh);
    }
    if (reaction_s) {
      c.params.reaction_time = *reaction_s;
    }
    c.validate();
    return c;
  }
};

namespace detail
{

inline std::atomic<bool> g_interrupted{false};

extern "C" inline void on_signal(int) { g_interrupted = true; }

/// Blocks until SIGINT/SIGTERM or until `seconds` elapse (when positive).
inline void wait_for_exit(double seconds)
{
  g_interrupted = false;
  auto previous_int = std::signal(SIGINT, on_signal);
  auto previous_term = std::signal(SIGTERM, on_signal);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(seconds));
  while (!g_interrupted && (seconds <= 0.0 || std::chrono::steady_clock::now() < deadline)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
}

inline risk::GazeTarget gaze_option(const std::string & text)
{
  const auto g = risk::parse_gaze(text);
  if (!g) {
    throw ValidationError("unknown gaze '" + text + "'");
  }
  return *g;
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void emit(const std::string & path, std::ostream & fallback, Fn && write)
{
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw IoError("cannot write " + path);
  }
  write(file);
}

inline std::string polygon_line(const server::Json & zone)
{
  server::Json line{
    {"label", zone["label"]}, {"color", zone["color"]}, {"vertices", zone["vertices"]}};
  return line.dump();
}

}  // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  CliConfig g;
  CLI::App app{"Parking-manoeuvre pedestrian risk assessment", "parkrisk"};
  app.option_defaults()->always_capture_default();
  app.add_option("--config", g.config_path, "INI config file")->option_text("FILE");
  app.add_option("--seed", g.seed, "master random seed");
  app.add_option("--out", g.out, "output file or directory");
  app.add_flag("--show-config", g.show_config, "print the resolved config and exit");
  app.add_option("--speed-kmh", g.speed_kmh, "reverse speed override [km/h]");
  app.add_option("--reaction-s", g.reaction_s, "driver reaction time override [s]");
  app.add_flag("-v,--verbose", g.verbosity, "more diagnostics on stderr");
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::function<int()> action;

  // zones
  auto * zones = app.add_subcommand("zones", "emit zone polygons, one zone per line");
  std::string zones_format = "polygons";
  std::string zones_gaze = "unknown";
  int zones_resolution = 16;
  zones->add_option("--format", zones_format, "polygons | json")
    ->check(CLI::IsMember({"polygons", "json"}));
  zones->add_option("--gaze", zones_gaze, "gaze state used for the colors");
  zones->add_option("--resolution", zones_resolution, "arc segments per quarter circle")
    ->check(CLI::PositiveNumber);
  zones->callback([&] {
    action = [&] {
      const auto config = g.resolve();
      const auto j = server::zones_json(config, detail::gaze_option(zones_gaze), zones_resolution);
      detail::emit(g.out, out, [&](std::ostream & os) {
        if (zones_format == "json") {
          os << j.dump(2) << '\n';
        } else {
          for (const auto & zone : j["zones"]) {
            os << detail::polygon_line(zone) << '\n';
          }
        }
      });
      return kExitOk;
    };
  });

  // matrix
  auto * matrix = app.add_subcommand("matrix", "print the risk table for a gaze state");
  std::string matrix_gaze = "center";
  std::string matrix_format = "text";
  matrix->add_option("--gaze", matrix_gaze, "left | center | right | unknown");
  matrix->add_option("--format", matrix_format, "text | json")
    ->check(CLI::IsMember({"text", "json"}));
  matrix->callback([&] {
    action = [&] {
      const auto config = g.resolve();
      const auto gaze = detail::gaze_option(matrix_gaze);
      const auto m = risk::risk_matrix(config.params);
      detail::emit(g.out, out, [&](std::ostream & os) {
        if (matrix_format == "json") {
          os << reporting::matrix_to_json(m).dump(2) << '\n';
        } else {
          os << reporting::render_matrix(m, gaze);
        }
      });
      return kExitOk;
    };
  });

  // simulate
  auto * simulate = app.add_subcommand("simulate", "generate a labeled synthetic dataset");
  sim::ScenarioSpec spec;
  std::string noise_path;
  std::string motion = "parked";
  simulate->add_option("--frames", spec.frames, "number of frames")->check(CLI::PositiveNumber);
  simulate->add_option("--peds", spec.pedestrians, "pedestrians per frame");
  simulate->add_option("--cars", spec.cars, "cars per frame (stored, not scored)");
  simulate->add_option("--noise", noise_path, "noise model JSON")->option_text("FILE");
  simulate->add_option("--motion", motion, "parked | reversing")
    ->check(CLI::IsMember({"parked", "reversing"}));
  simulate->add_option("--margin", spec.boundary_margin, "minimum distance from zone boundaries");
  simulate->add_option("--scene-frames", spec.scene_frames, "frames per placement")
    ->check(CLI::PositiveNumber);
  simulate->add_option("--frame-rate", spec.frame_rate, "frames per second");
  simulate->callback([&] {
    action = [&] {
      if (g.out.empty()) {
        throw ValidationError("simulate needs --out <dir>");
      }
      const auto config = g.resolve();
      spec.seed = g.seed;
      spec.motion = motion == "parked" ? sim::Motion::Parked : sim::Motion::Reversing;
      auto ds = sim::generate(spec, config);
      if (!noise_path.empty()) {
        const auto noise = sim::calibrate(sim::load_noise(noise_path), spec, config);
        ds = sim::apply_noise(ds, noise, g.seed);
      }
      sim::write_dataset(ds, g.out);
      out << "wrote " << ds.truth.size() << " frames to " << g.out << '\n';
      return kExitOk;
    };
  });

  // replay
  auto * replay = app.add_subcommand("replay", "run the pipeline over a dataset directory");
  std::string replay_dir;
  bool replay_lenient = false;
  replay->add_option("dataset", replay_dir, "dataset directory")->required();
  replay->add_flag("--lenient", replay_lenient, "skip malformed lines");
  replay->callback([&] {
    action = [&] {
      const auto config = g.resolve();
      const auto result = dras::run_replay(replay_dir, config, replay_lenient);
      for (const auto & e : result.ingest.errors) {
        err << e.file << ':' << e.line << ": " << e.message << '\n';
      }
      const std::string path =
        g.out.empty() ? (std::filesystem::path(replay_dir) / "predictions.jsonl").string() : g.out;
      dras::write_predictions(result.predictions, path);
      out << "replayed " << result.ingest.count << " percepts, " << result.predictions.size()
          << " frames -> " << path << '\n';
      return kExitOk;
    };
  });

  // evaluate
  auto * evaluate = app.add_subcommand("evaluate", "score predictions against labels");
  std::string eval_dir;
  std::string eval_predictions;
  std::string eval_truth;
  std::string eval_format = "text";
  evaluate->add_option("dataset", eval_dir, "dataset directory");
  evaluate->add_option("--predictions", eval_predictions, "predictions file")->option_text("FILE");
  evaluate->add_option("--truth", eval_truth, "label file")->option_text("FILE");
  evaluate->add_option("--format", eval_format, "text | json")
    ->check(CLI::IsMember({"text", "json"}));
  evaluate->callback([&] {
    action = [&] {
      if (eval_dir.empty() && (eval_predictions.empty() || eval_truth.empty())) {
        throw ValidationError("evaluate needs a dataset directory or --predictions and --truth");
      }
      const std::filesystem::path dir(eval_dir);
      const auto predicted = dras::read_predictions(
        eval_predictions.empty() ? dir / "predictions.jsonl" : std::filesystem::path(eval_predictions));
      const auto truth = dras::read_truth(
        eval_truth.empty() ? dir / dras::kTruthFile : std::filesystem::path(eval_truth));
      const auto report = dras::evaluate(predicted, truth);
      detail::emit(g.out, out, [&](std::ostream & os) {
        if (eval_format == "json") {
          os << report.to_json().dump(2) << '\n';
        } else {
          os << reporting::render_evaluation(report);
        }
      });
      return kExitOk;
    };
  });

  // distribution
  auto * distribution =
    app.add_subcommand("distribution", "tabulate labeled frames by risk, gaze and scenario");
  std::string dist_input;
  distribution->add_option("input", dist_input, "dataset directory or label file")->required();
  distribution->callback([&] {
    action = [&] {
      std::filesystem::path path(dist_input);
      if (std::filesystem::is_directory(path)) {
        path /= dras::kTruthFile;
      }
      const auto d = reporting::distribution_report(dras::read_truth(path));
      detail::emit(g.out, out, [&](std::ostream & os) { os << reporting::render_distribution(d); });
      return kExitOk;
    };
  });

  // ingest
  auto * ingest_cmd = app.add_subcommand("ingest", "load percepts into the map");
  std::vector<std::string> ingest_files;
  std::string ingest_listen;
  double ingest_speed = 1.0;
  bool ingest_fast = false;
  bool ingest_lenient = false;
  double ingest_duration = 0.0;
  std::string ingest_snapshot;
  auto * file_opt = ingest_cmd->add_option("--file", ingest_files, "recorded line file(s)");
  auto * listen_opt = ingest_cmd->add_option("--listen", ingest_listen, "host:port line feed");
  file_opt->excludes(listen_opt);
  auto * speed_opt =
    ingest_cmd->add_option("--speed", ingest_speed, "playback rate")->check(CLI::PositiveNumber);
  ingest_cmd->add_flag("--fast", ingest_fast, "replay without pacing")->excludes(speed_opt);
  ingest_cmd->add_flag("--lenient", ingest_lenient, "skip malformed lines");
  ingest_cmd->add_option("--duration", ingest_duration, "stop listening after N seconds");
  ingest_cmd->add_option("--snapshot", ingest_snapshot, "export the map as JSON lines");
  ingest_cmd->callback([&] {
    action = [&] {
      g.resolve();
      ldm::LocalDynamicMap map;
      if (!ingest_listen.empty()) {
        auto handle = ingest::listen(ingest::parse_endpoint(ingest_listen), map, [&](const std::string & m) {
          err << "bad line: " << m << '\n';
        });
        err << "listening on port " << handle->port() << '\n';
        detail::wait_for_exit(ingest_duration);
        const auto stats = handle->shutdown();
        out << wire::Json{{"connections", stats.connections}, {"lines", stats.lines},
                          {"inserted", stats.inserted}, {"errors", stats.errors}}
                 .dump()
            << '\n';
      } else {
        if (ingest_files.empty()) {
          throw ValidationError("ingest needs --file or --listen");
        }
        ingest::ReplayOptions options;
        options.lenient = ingest_lenient;
        if (!ingest_fast) {
          options.speed_factor = ingest_speed;
        }
        const auto summary = ingest::replay(
          {ingest_files.begin(), ingest_files.end()}, options, map);
        for (const auto & e : summary.errors) {
          err << e.file << ':' << e.line << ": " << e.message << '\n';
        }
        out << wire::Json{{"count", summary.count}, {"duration_ms", summary.duration_ms},
                          {"errors", summary.errors.size()}, {"records", map.size()}}
                 .dump()
            << '\n';
      }
      if (!ingest_snapshot.empty()) {
        std::ofstream file(ingest_snapshot, std::ios::binary);
        if (!file) {
          throw IoError("cannot write " + ingest_snapshot);
        }
        ldm::export_snapshot(map, file);
      }
      return kExitOk;
    };
  });

  // serve
  auto * serve = app.add_subcommand("serve", "HTTP API and assessment stream");
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string serve_replay;
  std::string serve_ui;
  double serve_speed = 1.0;
  double serve_duration = 0.0;
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--replay", serve_replay, "dataset directory to stream");
  serve->add_option("--speed", serve_speed, "replay rate; 0 for as fast as possible")
    ->check(CLI::NonNegativeNumber);
  serve->add_option("--ui", serve_ui, "static UI bundle directory");
  serve->add_option("--duration", serve_duration, "stop after N seconds");
  serve->callback([&] {
    action = [&] {
      server::Server srv(g.resolve());
      if (!serve_ui.empty()) {
        srv.mount_ui(serve_ui);
      }
      const int port = srv.start(serve_host, serve_port);
      err << "serving on http://" << serve_host << ':' << port << '\n';
      std::thread replayer;
      if (!serve_replay.empty()) {
        replayer = std::thread([&] {
          try {
            const double speed =
              serve_speed > 0.0 ? serve_speed : std::numeric_limits<double>::infinity();
            const auto n = server::publish_replay(srv.hub(), serve_replay, srv.config(), speed);
            err << "replay published " << n << " frames\n";
          } catch (const std::exception & e) {
            err << "replay failed: " << e.what() << '\n';
          }
        });
      }
      detail::wait_for_exit(serve_duration);
      if (replayer.joinable()) {
        replayer.join();
      }
      srv.stop();
      return kExitOk;
    };
  });

  // montecarlo
  auto * mc = app.add_subcommand("montecarlo", "repeated noisy runs with accuracy statistics");
  std::size_t mc_trials = 20;
  sim::ScenarioSpec mc_spec;
  mc_spec.frames = 2000;
  std::string mc_noise;
  double zone_target = 0.92;
  double gaze_target = 0.73;
  std::string mc_format = "text";
  mc->add_option("--trials", mc_trials, "number of trials")->check(CLI::PositiveNumber);
  mc->add_option("--frames", mc_spec.frames, "frames per trial")->check(CLI::PositiveNumber);
  mc->add_option("--noise", mc_noise, "noise model JSON (overrides the targets)");
  mc->add_option("--zone-target", zone_target, "zone accuracy to calibrate for");
  mc->add_option("--gaze-target", gaze_target, "gaze accuracy to calibrate for");
  mc->add_option("--format", mc_format, "text | json")->check(CLI::IsMember({"text", "json"}));
  mc->callback([&] {
    action = [&] {
      const auto config = g.resolve();
      mc_spec.seed = g.seed;
      sim::NoiseModel noise;
      if (!mc_noise.empty()) {
        noise = sim::load_noise(mc_noise);
      } else {
        noise.zone_accuracy_target = zone_target;
        noise.gaze_accuracy_target = gaze_target;
      }
      noise = sim::calibrate(noise, mc_spec, config);
      const auto result = sim::monte_carlo(mc_spec, noise, mc_trials, config);
      detail::emit(g.out, out, [&](std::ostream & os) {
        if (mc_format == "json") {
          os << result.to_json().dump(2) << '\n';
        } else {
          os << sim::render_monte_carlo(result);
        }
      });
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion & e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError & e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (g.show_config) {
      out << format_config(g.resolve());
      return kExitOk;
    }
    if (!action) {
      err << app.help();
      return kExitValidation;
    }
    return action();
  } catch (const IoError & e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError & e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace parkrisk::cli

#endif  // PARKRISK__CLI_HPP_
