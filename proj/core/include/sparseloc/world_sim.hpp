#pragma once

#include <cstdint>
#include <vector>

#include "sparseloc/types.hpp"

namespace sparseloc {

struct WorldLandmark {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // world frame
  int label_index = 0;
  Eigen::VectorXd feature;  // unit norm
};

enum class Placement { kUniform, kClustered };

struct WorldSpec {
  double extent_x = 400.0;  // world spans [0, extent] in x and y
  double extent_y = 400.0;
  int landmark_count = 300;
  Placement placement = Placement::kUniform;
  double min_separation = 4.0;       // rejection-sampling spacing
  double feature_perturbation = 0.05;  // eta on class prototypes

  // When non-empty, landmarks are kept within corridor_half_width of this
  // polyline (streets of a town rather than open field).
  std::vector<Eigen::Vector2d> corridor;
  double corridor_half_width = 50.0;
  bool corridor_closed = false;
};

/// Range/FOV/noise model for the abstract landmark sensor.
/// Sensor frame convention: x forward, y left, z up.
struct SensorModel {
  double max_range = 60.0;
  double fov_horizontal = 2.0 * M_PI;
  double detect_prob = 0.9;
  double centroid_sigma = 0.3;
  double feature_noise_sigma = 0.05;
  double confusion_prob = 0.0;
  double false_positive_rate = 0.0;  // expected count per frame
  int cluster_points = 0;
  double cluster_sigma = 0.2;
};

struct OdomNoise {
  double trans_sigma = 0.0;  // m per step, per axis
  double rot_sigma = 0.0;    // rad per step (yaw)
};

LabelSet make_label_set(const std::vector<std::string>& labels, int feature_dim,
                        uint64_t seed);

std::vector<WorldLandmark> generate_world(uint64_t seed, const WorldSpec& spec,
                                          const LabelSet& labels);

struct TrajectorySpec {
  std::vector<Eigen::Vector2d> waypoints;
  double step_length = 1.0;
  bool closed = false;            // append first waypoint at the end
  bool reverse = false;           // traverse waypoints backwards
  double heading_offset = 0.0;    // rad added to the travel heading
};

/// Square loop of the given side length starting at `origin`.
std::vector<Eigen::Vector2d> square_loop(const Eigen::Vector2d& origin, double side);

std::vector<Pose> generate_trajectory(const TrajectorySpec& spec);

std::vector<DetectionFrame> simulate_run(const std::vector<WorldLandmark>& world,
                                         const std::vector<Pose>& trajectory,
                                         const LabelSet& labels,
                                         const SensorModel& sensor,
                                         const OdomNoise& odom_noise,
                                         uint64_t seed);

}  // namespace sparseloc
