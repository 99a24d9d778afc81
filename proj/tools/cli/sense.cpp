#include <filesystem>

#include "commands.hpp"
#include "mindless/error.hpp"
#include "mindless/sensor/debounce.hpp"
#include "mindless/sensor/landmark_io.hpp"
#include "mindless/sensor/pnp_solver.hpp"

namespace mindless::cli {

namespace {

void require_file(const Path& p, const char* what) {
  if (!std::filesystem::exists(p)) throw DataError(std::string("no such ") + what + ": " + p.string());
}

} // namespace

std::vector<std::optional<sensor::HeadPose>> solve_frames(
    const std::vector<sensor::LandmarkFrame>& frames) {
  const auto model = sensor::FaceModel3D::generic();
  std::vector<std::optional<sensor::HeadPose>> poses;
  poses.reserve(frames.size());
  for (const auto& f : frames) {
    try {
      poses.push_back(sensor::solve_head_pose(f, sensor::CameraModel::for_image(f.width, f.height), model));
    } catch (const DataError&) {
      poses.emplace_back();
    }
  }
  return poses;
}

analytics::IntervalTrack sense_track(const std::vector<sensor::LandmarkFrame>& frames,
                                     const sensor::CalibrationProfile& profile, double fps,
                                     int debounce) {
  if (frames.empty()) throw InsufficientData("landmark stream has no frames");
  if (!(fps > 0.0)) throw UsageError("--fps must be positive");
  const auto poses = solve_frames(frames);
  sensor::Debouncer d(debounce);
  std::vector<analytics::StateMark> marks;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    // A face the solver cannot place is not looking at the screen.
    const auto state = poses[i] ? sensor::judge(*poses[i], profile) : sensor::AttentionState::Distracted;
    if (const auto c = d.push({frames[i].timestamp, state})) marks.push_back({c->t, c->state});
  }
  return analytics::IntervalTrack::from_marks(analytics::LabelSource::Detection,
                                              frames.front().timestamp,
                                              frames.back().timestamp + 1.0 / fps,
                                              sensor::AttentionState::Attentive, marks);
}

void sense(const SenseOptions& o) {
  require_file(o.landmarks, "landmark file");
  if (!std::filesystem::exists(o.profile))
    throw DataError("no calibration profile at " + o.profile.string() +
                    "; run `mindless calibrate --landmarks <sweep> --out " + o.profile.string() +
                    "` first");
  if (o.debounce < 1) throw UsageError("--debounce must be at least 1");
  const auto profile = sensor::read_profile(o.profile);
  analytics::write_track(o.out, sense_track(sensor::read_landmarks(o.landmarks), profile, o.fps, o.debounce));
}

sensor::CalibrationProfile calibrate(const CalibrateOptions& o) {
  require_file(o.landmarks, "landmark file");
  const auto frames = sensor::read_landmarks(o.landmarks);
  std::vector<sensor::HeadPose> poses;
  for (const auto& p : solve_frames(frames))
    if (p) poses.push_back(*p);
  const auto profile = sensor::calibrate(poses, frames.empty() ? 0.0 : frames.back().timestamp);
  sensor::write_profile(o.out, profile);
  return profile;
}

} // namespace mindless::cli
