#pragma once

#include <vector>

#include "sparseloc/mapping.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

struct PoseError {
  double translation_error = 0.0;  // m
  double rotation_error = 0.0;     // degrees, geodesic angle
};

struct SuccessThreshold {
  double max_trans;  // m
  double max_rot;    // degrees
};

inline std::vector<SuccessThreshold> default_thresholds() {
  return {{4.0, 3.0}, {10.0, 5.0}};
}

struct RunMetrics {
  double ate = 0.0;  // m
  double are = 0.0;  // degrees
  std::vector<double> success_rate;  // percent, one per threshold
  size_t frames_evaluated = 0;
};

struct MapStats {
  size_t instance_count = 0;
  double sparsity_ratio = 0.0;  // raw points per map instance
};

PoseError pose_error(const Pose& estimate, const Pose& truth);

/// Means over the supplied frame pairs; success rate is the percentage of
/// frames under both bounds of each threshold.
RunMetrics run_metrics(const std::vector<Pose>& estimates,
                       const std::vector<Pose>& ground_truth,
                       const std::vector<SuccessThreshold>& thresholds);

MapStats map_stats(const SparseMap& map, size_t raw_point_count);

/// Percent ATE reduction, 100 * (coarse - refined) / coarse.
double ablation_improvement(double ate_coarse, double ate_refined);

}  // namespace sparseloc
