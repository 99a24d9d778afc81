#include "mindless/sensor/landmark_io.hpp"

#include <fstream>

#include <json.hpp>

#include "mindless/error.hpp"

namespace mindless::sensor {

std::string encode_landmarks(const LandmarkFrame& frame) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : frame.points) pts.push_back({p.x(), p.y()});
  return nlohmann::json{{"t", frame.timestamp}, {"w", frame.width}, {"h", frame.height},
                        {"points", pts}}
      .dump();
}

LandmarkFrame decode_landmarks(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(e.byte == 0 ? 0 : e.byte - 1, "malformed landmark record");
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    const auto it = j.find(key);
    if (it == j.end()) throw DecodeError(0, std::string("missing field '") + key + "'");
    return *it;
  };
  LandmarkFrame f;
  try {
    f.timestamp = require("t").get<double>();
    f.width = require("w").get<int>();
    f.height = require("h").get<int>();
    for (const auto& p : require("points")) {
      if (!p.is_array() || p.size() != 2) throw DecodeError(0, "point is not an [x, y] pair");
      f.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  } catch (const nlohmann::json::type_error& e) {
    throw DecodeError(0, std::string("wrong field type: ") + e.what());
  }
  try {
    f.validate();
  } catch (const InvalidArgument& e) {
    throw DecodeError(0, e.what());
  }
  return f;
}

std::vector<LandmarkFrame> read_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<LandmarkFrame> frames;
  std::string line;
  std::size_t offset = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      try {
        frames.push_back(decode_landmarks(line));
      } catch (const DecodeError& e) {
        throw DecodeError(offset + e.offset(), path.string() + " line " +
                                                   std::to_string(line_no) + ": " + e.reason());
      }
    }
    offset += line.size() + 1;
  }
  return frames;
}

void write_landmarks(const std::filesystem::path& path, const std::vector<LandmarkFrame>& frames) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& f : frames) out << encode_landmarks(f) << '\n';
}

} // namespace mindless::sensor
