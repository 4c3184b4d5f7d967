#include "sparseloc/late_opt.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sparseloc {

void HistoryBuffer::push(std::vector<Detection> detections, const Pose& odometry_step) {
  entries_.push_back({std::move(detections), odometry_step});
  while (entries_.size() > capacity_) entries_.pop_front();
}

Pose chain_relative(const HistoryBuffer& history, size_t from_index) {
  if (from_index >= history.size())
    throw std::out_of_range("chain_relative: index outside buffer");
  Pose rel = Pose::Identity();
  for (size_t i = from_index + 1; i < history.size(); ++i)
    rel = compose(rel, history.entry(i).odometry_step);
  return rel;
}

CorrespondenceSet gather_correspondences(const HistoryBuffer& history,
                                         const Pose& anchor_pose,
                                         const SparseMap& map,
                                         const RefineConfig& cfg) {
  if (history.size() == 0)
    throw std::invalid_argument("gather_correspondences: empty history");
  CorrespondenceSet pairs;
  for (size_t i = 0; i < history.size(); ++i) {
    const Pose rel = chain_relative(history, i);
    const Pose rel_inv = inverse(rel);
    const Pose frame_pose = compose(anchor_pose, rel_inv);
    for (const auto& det : history.entry(i).detections) {
      int best = -1;
      double best_sem = cfg.min_semantic;
      for (size_t k = 0; k < map.instances.size(); ++k) {
        const double phi_sem = semantic_affinity(det.feature, map.instances[k].feature);
        if (phi_sem > best_sem) {
          best_sem = phi_sem;
          best = static_cast<int>(k);
        }
      }
      if (best < 0) continue;
      const auto& inst = map.instances[static_cast<size_t>(best)];
      const Eigen::Vector3d predicted = transform_point(frame_pose, det.centroid_local);
      if ((predicted - inst.centroid).norm() > cfg.max_pair_distance) continue;
      Correspondence c;
      c.source = transform_point(rel_inv, det.centroid_local);
      c.target = inst.centroid;
      c.weight = cfg.semantic_weights ? best_sem : 1.0;
      pairs.push_back(c);
    }
  }
  return pairs;
}

namespace {

/// Weighted Kabsch over the selected pair indices.
Pose fit_rigid(const CorrespondenceSet& pairs, const std::vector<size_t>& idx,
               const std::vector<double>* weights) {
  double wsum = 0.0;
  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d tgt_mean = Eigen::Vector3d::Zero();
  for (size_t n = 0; n < idx.size(); ++n) {
    const double w = weights ? (*weights)[n] : pairs[idx[n]].weight;
    src_mean += w * pairs[idx[n]].source;
    tgt_mean += w * pairs[idx[n]].target;
    wsum += w;
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("fit_rigid: zero total weight");
  src_mean /= wsum;
  tgt_mean /= wsum;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (size_t n = 0; n < idx.size(); ++n) {
    const double w = weights ? (*weights)[n] : pairs[idx[n]].weight;
    cov += w * (pairs[idx[n]].target - tgt_mean) *
           (pairs[idx[n]].source - src_mean).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(1) < 1e-12 * std::max(sv(0), 1e-300))
    throw std::invalid_argument("fit_rigid: degenerate (collinear) geometry");

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
    d(2, 2) = -1.0;  // reflection guard
  Pose out;
  out.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  out.translation = tgt_mean - out.rotation * src_mean;
  return out;
}

double residual(const Pose& t, const Correspondence& c) {
  return (transform_point(t, c.source) - c.target).norm();
}

std::vector<size_t> all_indices(size_t n) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

Pose solve_alignment(const CorrespondenceSet& pairs, const RefineConfig& cfg) {
  if (static_cast<int>(pairs.size()) < cfg.min_pairs)
    throw std::invalid_argument("solve_alignment: too few correspondence pairs");

  std::mt19937_64 rng(cfg.ransac_seed);
  std::uniform_int_distribution<size_t> pick(0, pairs.size() - 1);
  std::vector<size_t> best_inliers;
  for (int it = 0; it < cfg.ransac_iters; ++it) {
    size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    Pose model;
    try {
      model = fit_rigid(pairs, {a, b, c}, nullptr);
    } catch (const std::invalid_argument&) {
      continue;  // collinear sample
    }
    std::vector<size_t> inliers;
    for (size_t i = 0; i < pairs.size(); ++i)
      if (residual(model, pairs[i]) < cfg.ransac_inlier_thresh) inliers.push_back(i);
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
  }
  if (static_cast<int>(best_inliers.size()) < cfg.min_pairs)
    throw std::runtime_error("solve_alignment: no consensus set of min_pairs inliers");

  Pose estimate = fit_rigid(pairs, best_inliers, nullptr);

  if (cfg.solver == RefineSolver::kHuberIrls) {
    const auto idx = all_indices(pairs.size());
    std::vector<double> weights(pairs.size());
    for (int it = 0; it < 50; ++it) {
      for (size_t i = 0; i < pairs.size(); ++i) {
        const double r = residual(estimate, pairs[i]);
        const double huber = r <= cfg.huber_delta ? 1.0 : cfg.huber_delta / r;
        weights[i] = pairs[i].weight * huber;
      }
      const Pose next = fit_rigid(pairs, idx, &weights);
      const double change = (next.rotation - estimate.rotation).norm() +
                            (next.translation - estimate.translation).norm();
      estimate = next;
      if (change < 1e-9) break;
    }
  }
  return estimate;
}

Pose refine(const HistoryBuffer& history, const Pose& anchor_pose,
            const SparseMap& map, const RefineConfig& cfg) {
  try {
    const CorrespondenceSet pairs = gather_correspondences(history, anchor_pose, map, cfg);
    return solve_alignment(pairs, cfg);
  } catch (const std::exception&) {
    return anchor_pose;  // refinement must never leave the output undefined
  }
}

}  // namespace sparseloc
