#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>

#include "mindless/sensor/head_pose.hpp"

namespace mindless::sensor {

/// Per-user on-screen angular range, in degrees.
struct CalibrationProfile {
  double yaw_min = 0.0;
  double yaw_max = 0.0;
  double pitch_min = 0.0;
  double pitch_max = 0.0;
  double captured_at = 0.0;

  void validate() const;
  friend bool operator==(const CalibrationProfile&, const CalibrationProfile&) = default;
};

enum class AttentionState { Attentive, Distracted };
std::string_view to_string(AttentionState s);
std::optional<AttentionState> attention_state_from_string(std::string_view s);

/// Componentwise min/max of yaw and pitch over poses gathered while the user
/// follows the edge target. Throws InsufficientData for an empty sequence and
/// DegenerateInput when either range collapses to a point.
CalibrationProfile calibrate(std::span<const HeadPose> poses, double captured_at = 0.0);

/// Inclusive range test; roll is ignored.
AttentionState judge(const HeadPose& pose, const CalibrationProfile& profile);

/// `profile.json`: {"captured_at":..,"pitch_max":..,"pitch_min":..,"yaw_max":..,"yaw_min":..}
void write_profile(const std::filesystem::path& path, const CalibrationProfile& profile);
CalibrationProfile read_profile(const std::filesystem::path& path);

} // namespace mindless::sensor
