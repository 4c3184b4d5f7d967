#include "sparseloc/geometry.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace sparseloc {

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

bool is_valid_rotation(const Eigen::Matrix3d& r, double tol) {
  const Eigen::Matrix3d err = r.transpose() * r - Eigen::Matrix3d::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.transpose();
  out.translation = -(p.rotation.transpose() * p.translation);
  return out;
}

Eigen::Vector3d transform_point(const Pose& p, const Eigen::Vector3d& x) {
  return p.rotation * x + p.translation;
}

EulerAngles euler_from_rotation(const Eigen::Matrix3d& r) {
  EulerAngles e;
  const double sp = -r(2, 0);
  e.pitch = std::asin(std::clamp(sp, -1.0, 1.0));
  if (std::abs(e.pitch) > M_PI / 2.0 - 1e-3) {
    // Gimbal lock: roll fixed at 0, yaw takes the remaining rotation.
    e.roll = 0.0;
    e.yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    e.roll = std::atan2(r(2, 1), r(2, 2));
    e.yaw = std::atan2(r(1, 0), r(0, 0));
  }
  return e;
}

Eigen::Matrix3d rotation_from_euler(const EulerAngles& e) {
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  Eigen::Matrix3d rz, ry, rx;
  rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  return rz * ry * rx;
}

Pose pose_from_xyyaw(double x, double y, double yaw) {
  Pose p;
  p.rotation = rotation_from_euler({0.0, 0.0, yaw});
  p.translation = Eigen::Vector3d(x, y, 0.0);
  return p;
}

Eigen::Vector3d weighted_translation_mean(std::span<const Pose> poses,
                                          std::span<const double> weights,
                                          double gamma) {
  if (poses.empty() || poses.size() != weights.size())
    throw std::invalid_argument("weighted_translation_mean: size mismatch or empty input");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("weighted_translation_mean: negative weight");
    sum += std::pow(w, gamma);
  }
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw std::invalid_argument("weighted_translation_mean: degenerate weight vector");
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < poses.size(); ++i)
    acc += (std::pow(weights[i], gamma) / sum) * poses[i].translation;
  return acc;
}

double circular_mean(std::span<const double> angles,
                     std::span<const double> weights, double gamma) {
  if (angles.empty() || angles.size() != weights.size())
    throw std::invalid_argument("circular_mean: size mismatch or empty input");
  double s = 0.0, c = 0.0;
  for (size_t i = 0; i < angles.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("circular_mean: negative weight");
    const double w = std::pow(weights[i], gamma);
    s += w * std::sin(angles[i]);
    c += w * std::cos(angles[i]);
  }
  if (std::hypot(s, c) < 1e-12)
    throw std::domain_error("circular_mean: undefined for antipodal inputs");
  return normalize_angle(std::atan2(s, c));
}

std::array<double, 12> pose_to_array(const Pose& p) {
  std::array<double, 12> a{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[static_cast<size_t>(3 * i + j)] = p.rotation(i, j);
  for (int i = 0; i < 3; ++i) a[static_cast<size_t>(9 + i)] = p.translation(i);
  return a;
}

Pose pose_from_array(const std::array<double, 12>& a) {
  Pose p;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p.rotation(i, j) = a[static_cast<size_t>(3 * i + j)];
  for (int i = 0; i < 3; ++i) p.translation(i) = a[static_cast<size_t>(9 + i)];
  return p;
}

}  // namespace sparseloc
