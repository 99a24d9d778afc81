#pragma once

#include "mindless/sensor/head_pose.hpp"

namespace mindless::sensor {

struct SolverOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-8;
  int posit_iterations = 50;
};

/// Head pose from 2-D/3-D landmark correspondences.
///
/// A scaled-orthographic (POSIT) estimate seeds a Levenberg-Marquardt
/// refinement of the rotation (left-multiplied axis-angle increments) and
/// translation. Only steps that lower the RMS reprojection error are kept.
/// When the iteration cap is hit first, the best pose found is returned with
/// `converged == false`.
///
/// Throws DegenerateInput for collinear/coincident image points and
/// InvalidArgument for mismatched landmark sets.
HeadPose solve_head_pose(const LandmarkFrame& frame, const CameraModel& camera,
                         const FaceModel3D& model, const SolverOptions& options = {});

} // namespace mindless::sensor
