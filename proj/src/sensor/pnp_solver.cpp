#include "mindless/sensor/pnp_solver.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "mindless/error.hpp"

namespace mindless::sensor {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

// Pixel residuals (projected - observed), stacked x0 y0 x1 y1 ...
// Returns false if any point falls behind the camera.
bool residuals(const RigidPose& pose, const std::vector<Vec3>& model,
               const std::vector<Vec2>& image, const CameraModel& cam, Vec& r) {
  r.resize(static_cast<Eigen::Index>(2 * model.size()));
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Vec3 p = pose.rotation * model[i] + pose.translation;
    if (p.z() <= 1e-9) return false;
    const auto k = static_cast<Eigen::Index>(2 * i);
    r(k) = cam.focal_length * p.x() / p.z() + cam.principal_point.x() - image[i].x();
    r(k + 1) = cam.focal_length * p.y() / p.z() + cam.principal_point.y() - image[i].y();
  }
  return true;
}

// Scaled-orthographic pose iterations (POSIT), reference point = model[0].
RigidPose posit(const std::vector<Vec3>& model, const std::vector<Vec2>& image,
                const CameraModel& cam, int iterations) {
  const std::size_t n = model.size();
  if (n < 4) return {};
  Mat a(static_cast<Eigen::Index>(n - 1), 3);
  for (std::size_t i = 1; i < n; ++i)
    a.row(static_cast<Eigen::Index>(i - 1)) = (model[i] - model[0]).transpose();
  const Mat b = a.completeOrthogonalDecomposition().pseudoInverse();

  std::vector<Vec2> centred(n);
  for (std::size_t i = 0; i < n; ++i) centred[i] = image[i] - cam.principal_point;

  Vec eps = Vec::Zero(static_cast<Eigen::Index>(n - 1));
  RigidPose pose;
  for (int it = 0; it < iterations; ++it) {
    Vec xs(static_cast<Eigen::Index>(n - 1)), ys(static_cast<Eigen::Index>(n - 1));
    for (std::size_t i = 1; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i - 1);
      xs(k) = centred[i].x() * (1.0 + eps(k)) - centred[0].x();
      ys(k) = centred[i].y() * (1.0 + eps(k)) - centred[0].y();
    }
    const Vec3 iv = b * xs;
    const Vec3 jv = b * ys;
    const double si = iv.norm(), sj = jv.norm();
    if (si < 1e-12 || sj < 1e-12) break;
    const double scale = std::sqrt(si * sj);
    const Vec3 ih = iv / si, jh = jv / sj;
    const Vec3 kh = ih.cross(jh).normalized();
    Mat3 r;
    r.row(0) = ih.transpose();
    r.row(1) = jh.transpose();
    r.row(2) = kh.transpose();
    const double z0 = cam.focal_length / scale;
    pose.rotation = nearest_rotation(r);
    pose.translation = Vec3(centred[0].x() * z0 / cam.focal_length,
                            centred[0].y() * z0 / cam.focal_length, z0);

    Vec next = a * pose.rotation.row(2).transpose() / z0;
    const double change = (next - eps).cwiseAbs().maxCoeff();
    eps = next;
    if (change < 1e-10) break;
  }
  return pose;
}

void check_not_degenerate(const std::vector<Vec2>& image) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : image) mean += p;
  mean /= static_cast<double>(image.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : image) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(image.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  // Smallest principal spread under a hundredth of a pixel: collinear or
  // coincident landmarks.
  if (es.eigenvalues()(0) < 1e-4)
    throw DegenerateInput("landmarks are collinear or coincident; no pose solution");
}

} // namespace

HeadPose solve_head_pose(const LandmarkFrame& frame, const CameraModel& camera,
                         const FaceModel3D& model, const SolverOptions& options) {
  camera.validate();
  if (frame.points.size() != model.points.size())
    throw InvalidArgument("frame and face model have different landmark sets");
  if (frame.points.size() < 4) throw DegenerateInput("need at least 4 correspondences");
  for (const auto& p : frame.points)
    if (!p.allFinite()) throw InvalidArgument("non-finite landmark");
  check_not_degenerate(frame.points);

  const auto& pts3 = model.points;
  const auto& pts2 = frame.points;
  const double n = static_cast<double>(pts3.size());

  RigidPose pose = posit(pts3, pts2, camera, options.posit_iterations);
  Vec r;
  if (!residuals(pose, pts3, pts2, camera, r))
    throw DegenerateInput("initial pose places landmarks behind the camera");
  double cost = r.squaredNorm();

  double lambda = 1e-3;
  bool converged = false;
  Mat jac(static_cast<Eigen::Index>(2 * pts3.size()), 6);
  for (int it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < pts3.size(); ++i) {
      const Vec3 rm = pose.rotation * pts3[i];
      const Vec3 p = rm + pose.translation;
      const double iz = 1.0 / p.z();
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << camera.focal_length * iz, 0.0, -camera.focal_length * p.x() * iz * iz,
          0.0, camera.focal_length * iz, -camera.focal_length * p.y() * iz * iz;
      Mat3 skew;
      skew << 0.0, -rm.z(), rm.y(), rm.z(), 0.0, -rm.x(), -rm.y(), rm.x(), 0.0;
      const auto row = static_cast<Eigen::Index>(2 * i);
      jac.block<2, 3>(row, 0) = -dproj * skew;
      jac.block<2, 3>(row, 3) = dproj;
    }
    const Mat6 jtj = jac.transpose() * jac;
    const Vec6 grad = jac.transpose() * r;

    Mat6 damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
    const Vec6 step = damped.ldlt().solve(-grad);
    if (!step.allFinite()) break;

    RigidPose candidate;
    const double angle = step.head<3>().norm();
    const Mat3 inc = angle > 0.0
                         ? Eigen::AngleAxisd(angle, step.head<3>() / angle).toRotationMatrix()
                         : Mat3::Identity();
    candidate.rotation = inc * pose.rotation;
    candidate.translation = pose.translation + step.tail<3>();

    Vec rc;
    if (residuals(candidate, pts3, pts2, camera, rc) && rc.squaredNorm() < cost) {
      pose = candidate;
      r = rc;
      cost = rc.squaredNorm();
      lambda = std::max(lambda * 0.1, 1e-12);
    } else {
      lambda *= 10.0;
    }
    if (step.norm() < options.step_tolerance || cost < 1e-24) {
      converged = true;
      break;
    }
  }

  HeadPose out;
  const auto angles = angles_from_camera_rotation(pose.rotation);
  out.yaw = angles[0];
  out.pitch = angles[1];
  out.roll = angles[2];
  out.translation = pose.translation;
  out.reprojection_error = std::sqrt(cost / n);
  out.converged = converged;
  return out;
}

} // namespace mindless::sensor
