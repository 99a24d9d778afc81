#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mindless/error.hpp"
#include "simulate.hpp"

namespace mindless::cli {

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

SimulationParams load_params(const std::optional<Path>& file) {
  SimulationParams p;
  if (!file) return p;
  std::ifstream in(*file);
  if (!in) throw DataError("no such parameter file: " + file->string());
  try {
    return SimulationParams::from_json(nlohmann::json::parse(in), p);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(e.byte, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file->string() + ": " + e.what());
  }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mindless attention intervention toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mindless 1.0");

  PerturbOptions perturb_o;
  auto* perturb_c = app.add_subcommand("perturb", "Apply a perturbation pattern to a WAV file offline");
  perturb_c->add_option("--in", perturb_o.in, "16 kHz mono PCM16 WAV")->required();
  perturb_c->add_option("--out", perturb_o.out, "Output WAV")->required();
  perturb_c->add_option("--pattern", perturb_o.pattern, "volume_halve|volume_double|pitch_down|pitch_up")
      ->capture_default_str();
  perturb_c->add_option("--toggle", perturb_o.toggle, "Toggle period in seconds")->capture_default_str();
  perturb_c->add_option("--active", perturb_o.active, "Active windows, e.g. 0-6,12-18");

  ServeOptions serve_o;
  std::optional<std::string> profile_s, log_dir_s;
  auto* serve_c = app.add_subcommand("serve", "Run the session control server");
  serve_c->add_option("--host", serve_o.host)->capture_default_str();
  serve_c->add_option("--port", serve_o.port, "0 picks a free port")->capture_default_str();
  serve_c->add_option("--mode", serve_o.mode, "auto|manual")->capture_default_str();
  serve_c->add_option("--parts", serve_o.parts, "Comma-separated part modes")->delimiter(',')->capture_default_str();
  serve_c->add_option("--part-duration", serve_o.part_duration, "Seconds per part")->capture_default_str();
  serve_c->add_option("--seed", serve_o.seed)->capture_default_str();
  serve_c->add_flag("--blinded", serve_o.blinded, "Hide assignments from the console until the end");
  serve_c->add_flag("--shuffle", serve_o.shuffle, "Seeded random part order");
  serve_c->add_option("--time-scale", serve_o.time_scale, "Session seconds per wall second")->capture_default_str();
  serve_c->add_option("--session-id", serve_o.session_id);
  serve_c->add_option("--profile", profile_s, "Preloaded calibration profile");
  serve_c->add_option("--log-dir", log_dir_s, "Overrides $MINDLESS_LOG_DIR");

  SenseOptions sense_o;
  auto* sense_c = app.add_subcommand("sense", "Replay a landmark stream into a detection track");
  sense_c->add_option("--landmarks", sense_o.landmarks)->required();
  sense_c->add_option("--profile", sense_o.profile)->required();
  sense_c->add_option("--fps", sense_o.fps)->capture_default_str();
  sense_c->add_option("--debounce", sense_o.debounce, "Consecutive frames before a change")->capture_default_str();
  sense_c->add_option("--out", sense_o.out)->required();

  CalibrateOptions calibrate_o;
  auto* calibrate_c = app.add_subcommand("calibrate", "Build a calibration profile from an edge sweep");
  calibrate_c->add_option("--landmarks", calibrate_o.landmarks)->required();
  calibrate_c->add_option("--out", calibrate_o.out)->required();

  AnalyzeOptions analyze_o;
  std::optional<std::string> scores_s, text_s, svg_s;
  auto* analyze_c = app.add_subcommand("analyze", "Compute the study measures and tests");
  analyze_c->add_option("--events", analyze_o.events, "Session log (repeatable)")->required();
  analyze_c->add_option("--detections", analyze_o.detections, "Detection track per --events, in order");
  analyze_c->add_option("--report", analyze_o.report, "Report JSON")->required();
  analyze_c->add_option("--scores", scores_s, "Questionnaire scores JSON");
  analyze_c->add_option("--text", text_s, "Plain-text tables");
  analyze_c->add_option("--svg", svg_s, "Bar charts");

  std::uint64_t sim_seed = 0;
  std::optional<double> sim_duration, sim_precision, sim_recall;
  std::optional<std::vector<std::string>> sim_parts;
  std::optional<std::string> sim_params;
  Path sim_out;
  auto* simulate_c = app.add_subcommand("simulate", "Generate a synthetic session");
  simulate_c->add_option("--seed", sim_seed)->required();
  simulate_c->add_option("--duration", sim_duration, "Seconds per part");
  simulate_c->add_option("--parts", sim_parts, "Comma-separated part modes")->delimiter(',');
  simulate_c->add_option("--profile", sim_params, "Behavioural parameters JSON");
  simulate_c->add_option("--precision", sim_precision, "Injected sensor precision");
  simulate_c->add_option("--recall", sim_recall, "Injected sensor recall");
  simulate_c->add_option("--out", sim_out, "Output directory")->required();

  AgentOptions agent_o;
  std::optional<std::string> landmarks_s, calib_s, annotations_s, transcript_s;
  auto* agent_c = app.add_subcommand("agent", "Scripted client, sensor or console peer");
  agent_c->add_option("--role", agent_o.role, "client|sensor|console")->required();
  agent_c->add_option("--host", agent_o.host)->capture_default_str();
  agent_c->add_option("--port", agent_o.port)->capture_default_str();
  agent_c->add_option("--time-scale", agent_o.time_scale)->capture_default_str();
  agent_c->add_option("--landmarks", landmarks_s, "Sensor: session landmark stream");
  agent_c->add_option("--calibration-landmarks", calib_s, "Sensor: edge-sweep landmark stream");
  agent_c->add_option("--annotations", annotations_s, "Console: scripted marks");
  agent_c->add_option("--transcript", transcript_s, "Record every received frame");
  agent_c->add_flag("--calibrate", agent_o.calibrate, "Console: request a calibration before starting");
  agent_c->add_option("--debounce", agent_o.debounce)->capture_default_str();
  agent_c->add_option("--timeout", agent_o.timeout, "Wall seconds")->capture_default_str();

  ClientOptions client_o;
  auto* client_c = app.add_subcommand("client", "Live audio client: PCM16 stdin to stdout");
  client_c->add_option("--host", client_o.host)->capture_default_str();
  client_c->add_option("--port", client_o.port)->capture_default_str();

  auto to_path = [](const std::optional<std::string>& s) {
    return s ? std::optional<Path>(*s) : std::nullopt;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (perturb_c->parsed()) {
      perturb(perturb_o);
    } else if (serve_c->parsed()) {
      serve_o.profile = to_path(profile_s);
      serve_o.log_dir = to_path(log_dir_s);
      return serve(serve_o, out);
    } else if (sense_c->parsed()) {
      sense(sense_o);
    } else if (calibrate_c->parsed()) {
      const auto p = calibrate(calibrate_o);
      out << "yaw [" << p.yaw_min << ", " << p.yaw_max << "] pitch [" << p.pitch_min << ", "
          << p.pitch_max << "]\n";
    } else if (analyze_c->parsed()) {
      analyze_o.scores = to_path(scores_s);
      analyze_o.text = to_path(text_s);
      analyze_o.svg = to_path(svg_s);
      analyze(analyze_o);
    } else if (simulate_c->parsed()) {
      auto p = load_params(to_path(sim_params));
      p.seed = sim_seed;
      if (sim_duration) p.part_duration = *sim_duration;
      if (sim_parts) p.modes = parse_modes(*sim_parts);
      if (sim_precision) p.precision = *sim_precision;
      if (sim_recall) p.recall = *sim_recall;
      const auto r = simulate(p, sim_out);
      out << "events " << r.events.string() << '\n';
    } else if (agent_c->parsed()) {
      agent_o.landmarks = to_path(landmarks_s);
      agent_o.calibration_landmarks = to_path(calib_s);
      agent_o.annotations = to_path(annotations_s);
      agent_o.transcript = to_path(transcript_s);
      return agent(agent_o, out);
    } else if (client_c->parsed()) {
      return client(client_o, std::cin, std::cout);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return 0;
}

} // namespace mindless::cli
