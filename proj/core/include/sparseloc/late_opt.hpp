#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "sparseloc/mapping.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

/// Ring of the most recent frames used for retrospective refinement.
class HistoryBuffer {
 public:
  struct Entry {
    std::vector<Detection> detections;
    Pose odometry_step;  // relative pose from the previous frame
  };

  explicit HistoryBuffer(size_t capacity) : capacity_(capacity) {}

  void push(std::vector<Detection> detections, const Pose& odometry_step);
  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  const Entry& entry(size_t i) const { return entries_.at(i); }  // 0 = oldest

 private:
  size_t capacity_;
  std::deque<Entry> entries_;
};

struct Correspondence {
  Eigen::Vector3d source;  // current-frame coordinates
  Eigen::Vector3d target;  // map frame
  double weight = 1.0;
};

using CorrespondenceSet = std::vector<Correspondence>;

enum class RefineSolver { kProcrustesRansac, kHuberIrls };

struct RefineConfig {
  int history_window = 10;  // HistoryBuffer capacity (frames)
  double max_pair_distance = 5.0;
  int ransac_iters = 200;
  double ransac_inlier_thresh = 1.0;
  double huber_delta = 1.0;
  int min_pairs = 4;
  RefineSolver solver = RefineSolver::kProcrustesRansac;
  double min_semantic = 0.9;       // cosine-match gate for pair building
  bool semantic_weights = false;   // weight pairs by phi_sem instead of 1
  uint64_t ransac_seed = 0;
};

/// Cumulative relative transform from buffer entry `from_index` to the
/// newest entry: the product of the odometry steps after it.
Pose chain_relative(const HistoryBuffer& history, size_t from_index);

CorrespondenceSet gather_correspondences(const HistoryBuffer& history,
                                         const Pose& anchor_pose,
                                         const SparseMap& map,
                                         const RefineConfig& cfg);

/// Weighted closed-form rigid alignment (SVD with reflection guard) inside
/// a RANSAC loop; optional Huber IRLS polish. Throws when there are fewer
/// than min_pairs pairs or the geometry is degenerate.
Pose solve_alignment(const CorrespondenceSet& pairs, const RefineConfig& cfg);

/// gather + solve; returns the anchor unchanged when refinement fails.
Pose refine(const HistoryBuffer& history, const Pose& anchor_pose,
            const SparseMap& map, const RefineConfig& cfg);

}  // namespace sparseloc
