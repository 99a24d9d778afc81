#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mindless::sensor {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Landmark set shared by frames and face models, in this order.
enum class Landmark { NoseTip, Chin, LeftEyeOuter, RightEyeOuter, LeftMouth, RightMouth };
inline constexpr std::size_t kLandmarkCount = 6;
std::string_view to_string(Landmark l);

/// One frame of 2-D facial landmarks in pixels (x right, y down).
/// "Left" landmarks are the ones on the image's left side.
struct LandmarkFrame {
  double timestamp = 0.0;
  std::vector<Vec2> points;
  int width = 0;
  int height = 0;

  /// Throws InvalidArgument on a bad landmark count or out-of-image point.
  void validate() const;
};

/// Distortion-free pinhole camera.
struct CameraModel {
  double focal_length = 0.0;
  Vec2 principal_point = Vec2::Zero();

  /// Focal length = image width, principal point = image centre.
  static CameraModel for_image(int width, int height);
  void validate() const;
};

/// Rigid 3-D face in millimetres. Head frame: origin at the nose tip, +x to
/// the image's right at zero pose, +y up, +z out of the face toward the camera.
struct FaceModel3D {
  std::vector<Vec3> points;

  /// Generic six-point face used unless a config overrides it.
  static FaceModel3D generic();
  /// Throws InvalidArgument unless at least four points span 3-D.
  void validate() const;
};

/// Head orientation in degrees. yaw > 0 turns toward the subject's own right,
/// pitch > 0 looks up, roll is rotation about the facing direction.
/// Rotation order is intrinsic yaw, then pitch, then roll.
struct HeadPose {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  Vec3 translation = Vec3::Zero();  // camera frame, millimetres
  double reprojection_error = 0.0;  // RMS pixels
  bool converged = true;
};

/// Camera-from-head rotation for the given angles (degrees).
Mat3 camera_rotation(double yaw, double pitch, double roll);
/// Inverse of camera_rotation; angles wrapped to (-180, 180].
std::array<double, 3> angles_from_camera_rotation(const Mat3& r);

/// Pinhole projection of every model point. Throws DataError if a point lands
/// at or behind the camera plane.
std::vector<Vec2> project(const FaceModel3D& model, const HeadPose& pose,
                          const CameraModel& camera);

double rms_reprojection_error(const FaceModel3D& model, const HeadPose& pose,
                              const CameraModel& camera, const std::vector<Vec2>& observed);

} // namespace mindless::sensor
