#include "mindless/sensor/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mindless/error.hpp"

namespace mindless::sensor {

std::string_view to_string(AttentionState s) {
  return s == AttentionState::Attentive ? "attentive" : "distracted";
}

std::optional<AttentionState> attention_state_from_string(std::string_view s) {
  if (s == "attentive") return AttentionState::Attentive;
  if (s == "distracted") return AttentionState::Distracted;
  return std::nullopt;
}

void CalibrationProfile::validate() const {
  if (!(yaw_min < yaw_max) || !(pitch_min < pitch_max))
    throw DegenerateInput("calibration profile has an empty yaw or pitch range");
}

CalibrationProfile calibrate(std::span<const HeadPose> poses, double captured_at) {
  if (poses.empty()) throw InsufficientData("calibration needs at least one pose");
  CalibrationProfile p{poses[0].yaw, poses[0].yaw, poses[0].pitch, poses[0].pitch, captured_at};
  for (const auto& pose : poses) {
    p.yaw_min = std::min(p.yaw_min, pose.yaw);
    p.yaw_max = std::max(p.yaw_max, pose.yaw);
    p.pitch_min = std::min(p.pitch_min, pose.pitch);
    p.pitch_max = std::max(p.pitch_max, pose.pitch);
  }
  if (p.yaw_min == p.yaw_max || p.pitch_min == p.pitch_max)
    throw DegenerateInput("degenerate calibration: the head did not move across the range");
  return p;
}

AttentionState judge(const HeadPose& pose, const CalibrationProfile& profile) {
  const bool on_screen = pose.yaw >= profile.yaw_min && pose.yaw <= profile.yaw_max &&
                         pose.pitch >= profile.pitch_min && pose.pitch <= profile.pitch_max;
  return on_screen ? AttentionState::Attentive : AttentionState::Distracted;
}

void write_profile(const std::filesystem::path& path, const CalibrationProfile& profile) {
  const nlohmann::json j = {{"yaw_min", profile.yaw_min},     {"yaw_max", profile.yaw_max},
                            {"pitch_min", profile.pitch_min}, {"pitch_max", profile.pitch_max},
                            {"captured_at", profile.captured_at}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CalibrationProfile read_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open calibration profile " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(e.byte, path.string() + ": malformed profile");
  }
  CalibrationProfile p;
  auto field = [&](const char* name) {
    const auto it = j.find(name);
    if (it == j.end() || !it->is_number())
      throw DataError(path.string() + ": missing numeric field '" + name + "'");
    return it->get<double>();
  };
  p.yaw_min = field("yaw_min");
  p.yaw_max = field("yaw_max");
  p.pitch_min = field("pitch_min");
  p.pitch_max = field("pitch_max");
  p.captured_at = field("captured_at");
  p.validate();
  return p;
}

} // namespace mindless::sensor
