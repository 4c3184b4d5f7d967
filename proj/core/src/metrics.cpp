#include "sparseloc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sparseloc {

PoseError pose_error(const Pose& estimate, const Pose& truth) {
  PoseError e;
  e.translation_error = (estimate.translation - truth.translation).norm();
  const double tr = (truth.rotation.transpose() * estimate.rotation).trace();
  const double angle = std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0));
  e.rotation_error = angle * 180.0 / M_PI;
  return e;
}

RunMetrics run_metrics(const std::vector<Pose>& estimates,
                       const std::vector<Pose>& ground_truth,
                       const std::vector<SuccessThreshold>& thresholds) {
  if (estimates.empty()) throw std::invalid_argument("run_metrics: empty trace");
  if (estimates.size() != ground_truth.size())
    throw std::invalid_argument("run_metrics: estimate/ground-truth count mismatch");

  RunMetrics m;
  m.frames_evaluated = estimates.size();
  m.success_rate.assign(thresholds.size(), 0.0);
  for (size_t i = 0; i < estimates.size(); ++i) {
    const PoseError e = pose_error(estimates[i], ground_truth[i]);
    m.ate += e.translation_error;
    m.are += e.rotation_error;
    for (size_t t = 0; t < thresholds.size(); ++t)
      if (e.translation_error < thresholds[t].max_trans &&
          e.rotation_error < thresholds[t].max_rot)
        m.success_rate[t] += 1.0;
  }
  const double n = static_cast<double>(estimates.size());
  m.ate /= n;
  m.are /= n;
  for (auto& sr : m.success_rate) sr = 100.0 * sr / n;
  return m;
}

MapStats map_stats(const SparseMap& map, size_t raw_point_count) {
  if (map.instances.empty()) throw std::invalid_argument("map_stats: empty map");
  if (raw_point_count == 0)
    throw std::invalid_argument("map_stats: raw_point_count must be > 0");
  MapStats s;
  s.instance_count = map.instances.size();
  s.sparsity_ratio =
      static_cast<double>(raw_point_count) / static_cast<double>(s.instance_count);
  return s;
}

double ablation_improvement(double ate_coarse, double ate_refined) {
  if (!(ate_coarse > 0.0))
    throw std::invalid_argument("ablation_improvement: nonpositive coarse ATE");
  return 100.0 * (ate_coarse - ate_refined) / ate_coarse;
}

}  // namespace sparseloc
