#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "mindless/error.hpp"
#include "mindless/sensor/calibration.hpp"
#include "mindless/sensor/debounce.hpp"
#include "mindless/sensor/head_pose.hpp"
#include "mindless/sensor/landmark_io.hpp"
#include "mindless/sensor/pnp_solver.hpp"
#include "../support/projection_oracle.hpp"

using namespace mindless::sensor;

namespace {

const CameraModel kCam = CameraModel::for_image(1280, 720);

LandmarkFrame frame_for(double yaw, double pitch, double roll, oracle::P3 t,
                        const CameraModel& cam = kCam) {
  LandmarkFrame f;
  f.width = 1280;
  f.height = 720;
  f.points = oracle::project(FaceModel3D::generic(), yaw, pitch, roll, t, cam);
  return f;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b + 540.0, 360.0) - 180.0;
  return std::abs(d);
}

HeadPose pose_of(double yaw, double pitch) {
  HeadPose p;
  p.yaw = yaw;
  p.pitch = pitch;
  return p;
}

} // namespace

TEST_CASE("module projection agrees with the independent oracle") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ang(-40, 40), z(400, 900), xy(-50, 50);
  for (int i = 0; i < 50; ++i) {
    HeadPose p;
    p.yaw = ang(rng);
    p.pitch = ang(rng);
    p.roll = ang(rng) / 2;
    p.translation = Vec3(xy(rng), xy(rng), z(rng));
    const auto mine = project(FaceModel3D::generic(), p, kCam);
    const auto ref = oracle::project(FaceModel3D::generic(), p.yaw, p.pitch, p.roll,
                                     {p.translation.x(), p.translation.y(), p.translation.z()}, kCam);
    for (std::size_t k = 0; k < mine.size(); ++k) CHECK((mine[k] - ref[k]).norm() < 1e-9);
  }
}

TEST_CASE("projection basics") {
  HeadPose p;
  p.translation = Vec3(0, 0, 600);
  const auto pts = project(FaceModel3D::generic(), p, kCam);
  CHECK((pts[0] - kCam.principal_point).norm() < 1e-12);

  CameraModel wide = kCam;
  wide.focal_length *= 2;
  const auto pts2 = project(FaceModel3D::generic(), p, wide);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(((pts2[i] - kCam.principal_point) - 2.0 * (pts[i] - kCam.principal_point)).norm() < 1e-9);

  // Looking up moves the chin toward the nose in the image, yaw to the
  // subject's right pushes the nose toward the image's left.
  const auto right = project(FaceModel3D::generic(), [] { HeadPose h; h.yaw = 20; h.translation = Vec3(0, 0, 600); return h; }(), kCam);
  CHECK(right[0].x() == doctest::Approx(kCam.principal_point.x()));
  CHECK(right[2].x() > pts[2].x());  // far eye swings toward the centre

  HeadPose behind;
  behind.translation = Vec3(0, 0, -5);
  CHECK_THROWS_AS(project(FaceModel3D::generic(), behind, kCam), mindless::DataError);
}

TEST_CASE("euler round trip") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ang(-80, 80);
  for (int i = 0; i < 200; ++i) {
    const double y = ang(rng), p = ang(rng), r = ang(rng);
    const auto back = angles_from_camera_rotation(camera_rotation(y, p, r));
    CHECK(back[0] == doctest::Approx(y).epsilon(1e-9));
    CHECK(back[1] == doctest::Approx(p).epsilon(1e-9));
    CHECK(back[2] == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("solve identity pose") {
  const auto pose = solve_head_pose(frame_for(0, 0, 0, {0, 0, 600}), kCam, FaceModel3D::generic());
  CHECK(std::abs(pose.yaw) < 0.5);
  CHECK(std::abs(pose.pitch) < 0.5);
  CHECK(std::abs(pose.roll) < 0.5);
  CHECK(pose.translation.z() == doctest::Approx(600).epsilon(1e-6));
  CHECK(pose.converged);
}

TEST_CASE("solve a turned head") {
  const auto pose =
      solve_head_pose(frame_for(20, -10, 0, {30, -20, 650}), kCam, FaceModel3D::generic());
  CHECK(angle_diff(pose.yaw, 20) < 1.0);
  CHECK(angle_diff(pose.pitch, -10) < 1.0);
  CHECK(angle_diff(pose.roll, 0) < 1.0);
  CHECK(pose.reprojection_error < 0.5);
}

TEST_CASE("degenerate and mismatched inputs") {
  LandmarkFrame f;
  f.width = 640;
  f.height = 480;
  f.points.assign(6, Vec2(100, 100));
  CHECK_THROWS_AS(solve_head_pose(f, kCam, FaceModel3D::generic()), mindless::DegenerateInput);
  for (int i = 0; i < 6; ++i) f.points[i] = Vec2(100 + 10 * i, 50 + 5 * i);
  CHECK_THROWS_AS(solve_head_pose(f, kCam, FaceModel3D::generic()), mindless::DegenerateInput);
  f.points.resize(5);
  CHECK_THROWS_AS(solve_head_pose(f, kCam, FaceModel3D::generic()), mindless::InvalidArgument);

  FaceModel3D flat{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)}};
  CHECK_THROWS_AS(flat.validate(), mindless::InvalidArgument);
  CHECK_NOTHROW(FaceModel3D::generic().validate());
}

TEST_CASE("refinement never increases the error and reports non-convergence") {
  std::mt19937 rng(8);
  std::normal_distribution<double> noise(0.0, 2.0);
  auto f = frame_for(15, 5, 3, {0, 0, 700});
  for (auto& p : f.points) p += Vec2(noise(rng), noise(rng));
  SolverOptions few;
  few.max_iterations = 1;
  const auto coarse = solve_head_pose(f, kCam, FaceModel3D::generic(), few);
  SolverOptions none;
  none.max_iterations = 0;
  const auto init = solve_head_pose(f, kCam, FaceModel3D::generic(), none);
  const auto fine = solve_head_pose(f, kCam, FaceModel3D::generic());
  CHECK(coarse.reprojection_error <= init.reprojection_error);
  CHECK(fine.reprojection_error <= coarse.reprojection_error);
  CHECK_FALSE(init.converged);
  CHECK(fine.converged);
}

TEST_CASE("calibration and judgment") {
  std::vector<HeadPose> poses{pose_of(-22, -15), pose_of(5, 0), pose_of(28, 10)};
  const auto prof = calibrate(poses, 12.5);
  CHECK(prof == CalibrationProfile{-22, 28, -15, 10, 12.5});

  poses.push_back(pose_of(0, 3));
  CHECK(calibrate(poses, 12.5) == prof);

  CHECK_THROWS_AS(calibrate(std::vector<HeadPose>{}), mindless::InsufficientData);
  std::vector<HeadPose> still(5, pose_of(3, 4));
  CHECK_THROWS_AS(calibrate(still), mindless::DegenerateInput);

  const CalibrationProfile p{-30, 30, -20, 15, 0};
  CHECK(judge(pose_of(35, 0), p) == AttentionState::Distracted);
  CHECK(judge(pose_of(30, 0), p) == AttentionState::Attentive);
  CHECK(judge(pose_of(0, -20), p) == AttentionState::Attentive);
  CHECK(judge(pose_of(0, 15.01), p) == AttentionState::Distracted);
  CHECK(judge(pose_of(10, 5), p) == AttentionState::Attentive);
}

TEST_CASE("enlarging the profile never flips attentive to distracted") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-60, 60), grow(0, 10);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    CalibrationProfile p{std::min(a, b), std::max(a, b) + 0.1, std::min(c, d), std::max(c, d) + 0.1, 0};
    CalibrationProfile bigger{p.yaw_min - grow(rng), p.yaw_max + grow(rng), p.pitch_min - grow(rng),
                              p.pitch_max + grow(rng), 0};
    const auto pose = pose_of(u(rng), u(rng));
    if (judge(pose, p) == AttentionState::Attentive)
      REQUIRE(judge(pose, bigger) == AttentionState::Attentive);
  }
}

TEST_CASE("profile file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "mindless_profile_test.json";
  const CalibrationProfile p{-21.5, 27.25, -14.0, 9.5, 3.0};
  write_profile(path, p);
  CHECK(read_profile(path) == p);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_profile(path), mindless::DataError);
}

TEST_CASE("debounce") {
  using S = AttentionState;
  auto seq = [](std::initializer_list<char> s) {
    std::vector<RawJudgment> out;
    double t = 0;
    for (char c : s) out.push_back({t++, c == 'A' ? S::Attentive : S::Distracted});
    return out;
  };
  const auto ev = debounce(seq({'A', 'A', 'D', 'A', 'D', 'D', 'D'}), 3);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == StateChange{4.0, S::Distracted});

  const auto raw = seq({'A', 'D', 'D', 'A', 'D', 'A', 'A'});
  const auto mirror = debounce(raw, 1);
  REQUIRE(mirror.size() == 4);
  CHECK(mirror[0] == StateChange{1.0, S::Distracted});
  CHECK(mirror[1] == StateChange{3.0, S::Attentive});
  CHECK(mirror[2] == StateChange{4.0, S::Distracted});
  CHECK(mirror[3] == StateChange{5.0, S::Attentive});

  CHECK(debounce(seq({'A', 'D', 'A', 'D', 'A', 'D', 'A', 'D'}), 2).empty());
  CHECK_THROWS_AS(Debouncer(0), mindless::InvalidArgument);
}

TEST_CASE("debounce property: every change is backed by k consecutive frames") {
  std::mt19937 rng(6);
  std::bernoulli_distribution flip(0.3);
  for (int k = 1; k <= 5; ++k) {
    std::vector<RawJudgment> raw;
    AttentionState s = AttentionState::Attentive;
    for (int i = 0; i < 500; ++i) {
      if (flip(rng)) s = s == AttentionState::Attentive ? AttentionState::Distracted : AttentionState::Attentive;
      raw.push_back({i / 15.0, s});
    }
    // Reference: scan for runs of length >= k that disagree with the state.
    std::vector<StateChange> expected;
    AttentionState cur = AttentionState::Attentive;
    for (std::size_t i = 0; i < raw.size();) {
      std::size_t j = i;
      while (j < raw.size() && raw[j].state == raw[i].state) ++j;
      if (raw[i].state != cur && static_cast<int>(j - i) >= k) {
        expected.push_back({raw[i].t, raw[i].state});
        cur = raw[i].state;
      }
      i = j;
    }
    CHECK(debounce(raw, k) == expected);
  }
}

TEST_CASE("landmark records round trip and reject bad input") {
  auto f = frame_for(10, 5, 0, {0, 0, 600});
  f.timestamp = 1.0 / 15.0;
  const auto back = decode_landmarks(encode_landmarks(f));
  CHECK(back.timestamp == f.timestamp);
  CHECK(back.width == 1280);
  for (std::size_t i = 0; i < f.points.size(); ++i) CHECK(back.points[i] == f.points[i]);

  CHECK_THROWS_AS(decode_landmarks(R"({"t":0,"w":640,"h":480})"), mindless::DecodeError);
  CHECK_THROWS_AS(decode_landmarks(R"({"t":0,"w":640,"h":480,"points":[[1,2]]})"), mindless::DecodeError);
  CHECK_THROWS_AS(decode_landmarks("{oops"), mindless::DecodeError);

  const auto path = std::filesystem::temp_directory_path() / "mindless_test.landmarks.jsonl";
  write_landmarks(path, {f, f});
  CHECK(read_landmarks(path).size() == 2);
  std::filesystem::remove(path);
}
