#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "sparseloc/geometry.hpp"

namespace sparseloc {

/// Fixed label vocabulary with one unit-norm feature prototype per class.
struct LabelSet {
  std::vector<std::string> labels;
  std::vector<Eigen::VectorXd> prototypes;

  size_t size() const { return labels.size(); }
  int index_of(const std::string& label) const;
};

/// One observed landmark instance in the sensor frame.
struct Detection {
  Eigen::Vector3d centroid_local = Eigen::Vector3d::Zero();
  Eigen::VectorXd feature;
  std::string label;
  double confidence = 1.0;
  std::vector<Eigen::Vector3d> points_local;  // optional raw cluster
};

struct DetectionFrame {
  int frame_index = 0;
  std::vector<Detection> detections;
  Pose odometry_step;            // relative, frame t-1 -> t
  std::optional<Pose> ground_truth_pose;  // evaluation only
};

}  // namespace sparseloc
