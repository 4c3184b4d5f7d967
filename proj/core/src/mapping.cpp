#include "sparseloc/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparseloc {

ClusterRefinement refine_cluster(const std::vector<Eigen::Vector3d>& points,
                                 double eps, int min_pts) {
  if (points.empty()) throw std::invalid_argument("refine_cluster: empty input");
  const size_t n = points.size();
  const double eps2 = eps * eps;

  auto region_query = [&](size_t p) {
    std::vector<size_t> nbrs;
    for (size_t q = 0; q < n; ++q)
      if ((points[p] - points[q]).squaredNorm() <= eps2) nbrs.push_back(q);
    return nbrs;
  };

  constexpr int kUnvisited = -2, kNoise = -1;
  std::vector<int> cluster_of(n, kUnvisited);
  int n_clusters = 0;
  for (size_t p = 0; p < n; ++p) {
    if (cluster_of[p] != kUnvisited) continue;
    auto nbrs = region_query(p);
    if (static_cast<int>(nbrs.size()) < min_pts) {
      cluster_of[p] = kNoise;
      continue;
    }
    const int cid = n_clusters++;
    cluster_of[p] = cid;
    std::vector<size_t> seeds = std::move(nbrs);
    for (size_t i = 0; i < seeds.size(); ++i) {
      const size_t q = seeds[i];
      if (cluster_of[q] == kNoise) cluster_of[q] = cid;
      if (cluster_of[q] != kUnvisited) continue;
      cluster_of[q] = cid;
      auto qn = region_query(q);
      if (static_cast<int>(qn.size()) >= min_pts)
        seeds.insert(seeds.end(), qn.begin(), qn.end());
    }
  }

  ClusterRefinement out;
  if (n_clusters == 0) {
    // All noise: fall back to the full set, flagged unrefined.
    for (size_t i = 0; i < n; ++i) out.inliers.push_back(i);
    out.refined = false;
  } else {
    std::vector<int> counts(static_cast<size_t>(n_clusters), 0);
    for (int c : cluster_of)
      if (c >= 0) ++counts[static_cast<size_t>(c)];
    const int best = static_cast<int>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    for (size_t i = 0; i < n; ++i)
      if (cluster_of[i] == best) out.inliers.push_back(i);
    out.refined = true;
  }
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (size_t i : out.inliers) acc += points[i];
  out.centroid = acc / static_cast<double>(out.inliers.size());
  return out;
}

double semantic_affinity(const Eigen::VectorXd& f_a, const Eigen::VectorXd& f_b) {
  if (f_a.norm() < 1e-9 || f_b.norm() < 1e-9)
    throw std::invalid_argument("semantic_affinity: zero-norm feature");
  return std::clamp(f_a.dot(f_b) / 2.0 + 0.5, 0.0, 1.0);
}

double geometric_similarity(const std::vector<Eigen::Vector3d>& new_points,
                            const std::vector<Eigen::Vector3d>& existing_points,
                            double radius) {
  if (new_points.empty() || existing_points.empty())
    throw std::invalid_argument("geometric_similarity: empty point set");
  const double r2 = radius * radius;
  int hits = 0;
  for (const auto& p : new_points) {
    for (const auto& q : existing_points) {
      if ((p - q).squaredNorm() <= r2) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(new_points.size());
}

double centroid_similarity(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                           double radius) {
  return std::exp(-(a - b).norm() / radius);
}

void associate_and_fuse(SparseMap& map, const Detection& detection,
                        const Pose& sensor_pose, const MappingConfig& cfg) {
  if (!detection.centroid_local.allFinite())
    throw std::invalid_argument("associate_and_fuse: non-finite centroid");

  Eigen::Vector3d centroid_map;
  std::vector<Eigen::Vector3d> points_map;
  if (!detection.points_local.empty()) {
    const auto refined =
        refine_cluster(detection.points_local, cfg.dbscan_eps, cfg.dbscan_min_pts);
    points_map.reserve(refined.inliers.size());
    for (size_t i : refined.inliers)
      points_map.push_back(transform_point(sensor_pose, detection.points_local[i]));
    centroid_map = transform_point(sensor_pose, refined.centroid);
  } else {
    centroid_map = transform_point(sensor_pose, detection.centroid_local);
  }

  int best = -1;
  double best_phi = 0.0, best_sem = 0.0;
  for (size_t k = 0; k < map.instances.size(); ++k) {
    const auto& inst = map.instances[k];
    const double phi_sem = semantic_affinity(detection.feature, inst.feature);
    double phi_geo;
    if (!points_map.empty() && !inst.points.empty())
      phi_geo = geometric_similarity(points_map, inst.points, cfg.geo_radius);
    else
      phi_geo = centroid_similarity(centroid_map, inst.centroid, cfg.geo_radius);
    const double phi = phi_sem + phi_geo;
    if (phi > best_phi) {
      best_phi = phi;
      best_sem = phi_sem;
      best = static_cast<int>(k);
    }
  }

  const bool matched = best >= 0 && best_phi > cfg.delta_sim &&
                       (cfg.min_semantic <= 0.0 || best_sem > cfg.min_semantic);
  if (matched) {
    auto& inst = map.instances[static_cast<size_t>(best)];
    const double n = static_cast<double>(inst.observation_count);
    if (!points_map.empty()) {
      inst.points.insert(inst.points.end(), points_map.begin(), points_map.end());
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      for (const auto& p : inst.points) acc += p;
      inst.centroid = acc / static_cast<double>(inst.points.size());
    } else {
      inst.centroid = (inst.centroid * n + centroid_map) / (n + 1.0);
    }
    Eigen::VectorXd fused =
        inst.confidence * n * inst.feature + detection.confidence * detection.feature;
    const double fn = fused.norm();
    if (fn > 1e-12) inst.feature = fused / fn;
    if (detection.confidence > inst.confidence) {
      inst.label = detection.label;
      inst.confidence = detection.confidence;
    }
    ++inst.observation_count;
  } else {
    MapInstance inst;
    inst.centroid = centroid_map;
    inst.feature = detection.feature.normalized();
    inst.label = detection.label;
    inst.confidence = detection.confidence;
    inst.observation_count = 1;
    inst.points = std::move(points_map);
    map.instances.push_back(std::move(inst));
  }
}

SparseMap build_map(const std::vector<DetectionFrame>& frames,
                    const std::vector<Pose>& poses, const LabelSet& label_set,
                    const MappingConfig& cfg) {
  if (frames.size() != poses.size())
    throw std::invalid_argument("build_map: frame/pose count mismatch");
  SparseMap map;
  map.label_set = label_set;
  for (size_t t = 0; t < frames.size(); ++t)
    for (const auto& det : frames[t].detections)
      associate_and_fuse(map, det, poses[t], cfg);
  return map;
}

}  // namespace sparseloc
