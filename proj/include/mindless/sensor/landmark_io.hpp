#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mindless/sensor/head_pose.hpp"

namespace mindless::sensor {

/// `*.landmarks.jsonl` line: {"h":720,"points":[[x,y],...],"t":12.4,"w":1280}
std::string encode_landmarks(const LandmarkFrame& frame);
LandmarkFrame decode_landmarks(std::string_view line);

std::vector<LandmarkFrame> read_landmarks(const std::filesystem::path& path);
void write_landmarks(const std::filesystem::path& path, const std::vector<LandmarkFrame>& frames);

} // namespace mindless::sensor
