#pragma once

#include <string>
#include <vector>

#include "sparseloc/types.hpp"

namespace sparseloc {

/// One fused landmark in the map frame.
struct MapInstance {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::VectorXd feature;  // unit norm
  std::string label;
  double confidence = 0.0;  // running max over observations
  int observation_count = 1;
  std::vector<Eigen::Vector3d> points;  // optional retained cluster
};

struct SparseMap {
  std::vector<MapInstance> instances;
  LabelSet label_set;

  size_t size() const { return instances.size(); }
};

struct MappingConfig {
  double delta_sim = 0.7;    // threshold on phi_sem + phi_geo
  double geo_radius = 2.0;   // nearest-neighbor radius for phi_geo
  double dbscan_eps = 0.5;
  int dbscan_min_pts = 3;
  double min_semantic = 0.5;  // extra phi_sem gate; <= 0 disables
};

struct ClusterRefinement {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  std::vector<size_t> inliers;  // indices into the input points
  bool refined = false;         // false when everything was noise
};

/// DBSCAN on the raw instance points; keeps the largest cluster. When all
/// points are noise the centroid of the full set is returned, unrefined.
ClusterRefinement refine_cluster(const std::vector<Eigen::Vector3d>& points,
                                 double eps, int min_pts);

/// phi_sem: cosine similarity of unit features mapped to [0, 1].
double semantic_affinity(const Eigen::VectorXd& f_a, const Eigen::VectorXd& f_b);

/// phi_geo for point clusters: fraction of new_points whose nearest
/// neighbor in existing_points lies within radius.
double geometric_similarity(const std::vector<Eigen::Vector3d>& new_points,
                            const std::vector<Eigen::Vector3d>& existing_points,
                            double radius);

/// phi_geo fallback for centroid-only detections: exp(-d / radius).
double centroid_similarity(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                           double radius);

void associate_and_fuse(SparseMap& map, const Detection& detection,
                        const Pose& sensor_pose, const MappingConfig& cfg);

SparseMap build_map(const std::vector<DetectionFrame>& frames,
                    const std::vector<Pose>& poses, const LabelSet& label_set,
                    const MappingConfig& cfg);

}  // namespace sparseloc
