#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mindless/control/router.hpp"
#include "mindless/scheduler/scheduler.hpp"

namespace mindless::cli {

/// Behavioural parameters of a synthetic participant and sensor.
struct SimulationParams {
  std::uint64_t seed = 1;
  double part_duration = 600.0;
  std::vector<sched::Mode> modes = {sched::Mode::Mindless, sched::Mode::Alerting,
                                    sched::Mode::Control};
  bool shuffle = true;

  double mean_attentive_gap = 45.0;
  double min_attentive_gap = 5.0;
  double mean_distraction = 15.0;
  double min_distraction = 2.0;
  /// Multiplier on distraction length per mode (mindless, alerting, control).
  std::array<double, 3> distraction_scale = {0.6, 0.8, 1.0};

  double precision = 0.476;
  double recall = 0.58;

  double yaw_range = 25.0;    // on-screen half-width, degrees
  double pitch_range = 15.0;  // on-screen half-height, degrees
  double fps = 15.0;
  int debounce = 3;  // frames the sensor waits before reporting a change
  double landmark_noise = 0.5;  // pixels
  int width = 1280;
  int height = 720;
  double calibration_duration = 20.0;

  void validate() const;
  static SimulationParams from_json(const nlohmann::json& j, SimulationParams base);
  nlohmann::json to_json() const;
};

struct SimulationOutput {
  std::vector<control::PartSpec> parts;
  std::filesystem::path events;
  std::filesystem::path landmarks;
  std::filesystem::path calibration_landmarks;
  std::filesystem::path annotations;
  std::filesystem::path plan;
};

/// Writes calibration.landmarks.jsonl, session.landmarks.jsonl,
/// annotations.jsonl, plan.json and session-sim<seed>.events.jsonl into `dir`.
/// Identical parameters give byte-identical files.
SimulationOutput simulate(const SimulationParams& params, const std::filesystem::path& dir);

/// Session-relative annotation script: {"mark":..,"t":..} per line.
struct ScriptedMark {
  double t = 0.0;
  std::string mark;
};
std::vector<ScriptedMark> read_annotations(const std::filesystem::path& path);

} // namespace mindless::cli
