#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

namespace sparseloc {

/// Rigid transform in SE(3). Rotation is kept as an orthonormal matrix
/// with determinant +1; all angles are radians, all distances meters.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose Identity() { return {}; }
};

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

bool is_valid_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
Eigen::Vector3d transform_point(const Pose& p, const Eigen::Vector3d& x);

/// Intrinsic Z-Y-X (yaw-pitch-roll) convention. Within 1e-3 rad of
/// |pitch| = pi/2, roll is set to 0 and yaw absorbs the remainder.
EulerAngles euler_from_rotation(const Eigen::Matrix3d& r);
Eigen::Matrix3d rotation_from_euler(const EulerAngles& e);

Pose pose_from_xyyaw(double x, double y, double yaw);

/// Convex combination of translations with weights w_i^gamma renormalized
/// to sum 1. Throws std::invalid_argument when all weights are zero.
Eigen::Vector3d weighted_translation_mean(std::span<const Pose> poses,
                                          std::span<const double> weights,
                                          double gamma);

/// atan2-of-sums circular average; result in (-pi, pi]. Throws
/// std::domain_error when the resultant vector norm is below 1e-12
/// (antipodal inputs, undefined mean).
double circular_mean(std::span<const double> angles,
                     std::span<const double> weights, double gamma);

/// Row-major 3x3 rotation followed by the translation.
std::array<double, 12> pose_to_array(const Pose& p);
Pose pose_from_array(const std::array<double, 12>& a);

}  // namespace sparseloc
