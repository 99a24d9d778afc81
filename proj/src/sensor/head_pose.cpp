#include "mindless/sensor/head_pose.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "mindless/error.hpp"

namespace mindless::sensor {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Head frame (+y up, +z toward the camera) to camera frame (+y down,
// +z forward) at zero pose.
const Mat3& head_to_camera() {
  static const Mat3 d = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  return d;
}

double wrap_degrees(double a) {
  a = std::fmod(a, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

} // namespace

std::string_view to_string(Landmark l) {
  switch (l) {
    case Landmark::NoseTip: return "nose_tip";
    case Landmark::Chin: return "chin";
    case Landmark::LeftEyeOuter: return "left_eye_outer";
    case Landmark::RightEyeOuter: return "right_eye_outer";
    case Landmark::LeftMouth: return "left_mouth";
    case Landmark::RightMouth: return "right_mouth";
  }
  return "?";
}

void LandmarkFrame::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
  if (points.size() != kLandmarkCount)
    throw InvalidArgument("expected " + std::to_string(kLandmarkCount) + " landmarks, got " +
                          std::to_string(points.size()));
  for (const auto& p : points)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()) || p.x() < 0.0 || p.y() < 0.0 ||
        p.x() > width || p.y() > height)
      throw InvalidArgument("landmark outside the image");
}

CameraModel CameraModel::for_image(int width, int height) {
  return CameraModel{static_cast<double>(width), Vec2(width / 2.0, height / 2.0)};
}

void CameraModel::validate() const {
  if (!(focal_length > 0.0) || !std::isfinite(focal_length))
    throw InvalidArgument("focal length must be positive");
}

FaceModel3D FaceModel3D::generic() {
  return FaceModel3D{{
      Vec3(0.0, 0.0, 0.0),       // nose tip
      Vec3(0.0, -63.0, -12.0),   // chin
      Vec3(-43.0, 32.0, -26.0),  // left eye outer corner
      Vec3(43.0, 32.0, -26.0),   // right eye outer corner
      Vec3(-28.0, -29.0, -24.0), // left mouth corner
      Vec3(28.0, -29.0, -24.0),  // right mouth corner
  }};
}

void FaceModel3D::validate() const {
  if (points.size() < 4) throw InvalidArgument("face model needs at least 4 points");
  Eigen::MatrixXd centered(3, points.size());
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) centered.col(static_cast<Eigen::Index>(i)) = points[i] - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto sv = svd.singularValues();
  if (sv(2) < 1e-6 * sv(0)) throw InvalidArgument("face model points are coplanar");
}

Mat3 camera_rotation(double yaw, double pitch, double roll) {
  const Mat3 head = (Eigen::AngleAxisd(-yaw * kDeg, Vec3::UnitY()) *
                     Eigen::AngleAxisd(-pitch * kDeg, Vec3::UnitX()) *
                     Eigen::AngleAxisd(roll * kDeg, Vec3::UnitZ()))
                        .toRotationMatrix();
  return head_to_camera() * head;
}

std::array<double, 3> angles_from_camera_rotation(const Mat3& r) {
  // head = Ry(a) Rx(b) Rz(c) with yaw = -a, pitch = -b, roll = c.
  const Mat3 head = head_to_camera() * r;
  const double b = std::asin(std::clamp(-head(1, 2), -1.0, 1.0));
  const double a = std::atan2(head(0, 2), head(2, 2));
  const double c = std::atan2(head(1, 0), head(1, 1));
  return {wrap_degrees(-a / kDeg), wrap_degrees(-b / kDeg), wrap_degrees(c / kDeg)};
}

std::vector<Vec2> project(const FaceModel3D& model, const HeadPose& pose,
                          const CameraModel& camera) {
  if (!std::isfinite(pose.yaw) || !std::isfinite(pose.pitch) || !std::isfinite(pose.roll) ||
      !pose.translation.allFinite())
    throw InvalidArgument("pose is not finite");
  const Mat3 r = camera_rotation(pose.yaw, pose.pitch, pose.roll);
  std::vector<Vec2> out;
  out.reserve(model.points.size());
  for (const auto& m : model.points) {
    const Vec3 p = r * m + pose.translation;
    if (p.z() <= 0.0) throw DataError("model point projects behind the camera");
    out.emplace_back(camera.focal_length * p.x() / p.z() + camera.principal_point.x(),
                     camera.focal_length * p.y() / p.z() + camera.principal_point.y());
  }
  return out;
}

double rms_reprojection_error(const FaceModel3D& model, const HeadPose& pose,
                              const CameraModel& camera, const std::vector<Vec2>& observed) {
  const auto projected = project(model, pose, camera);
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i)
    sum += (projected[i] - observed[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(observed.size()));
}

} // namespace mindless::sensor
