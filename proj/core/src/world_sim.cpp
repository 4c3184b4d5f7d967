#include "sparseloc/world_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sparseloc {

int LabelSet::index_of(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

namespace {

Eigen::VectorXd random_unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
  } while (v.norm() < 1e-9);
  return v.normalized();
}

Eigen::VectorXd perturbed_feature(const Eigen::VectorXd& base, double sigma,
                                  std::mt19937_64& rng) {
  if (sigma <= 0.0) return base;
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::VectorXd v = base;
  for (int i = 0; i < v.size(); ++i) v(i) += gauss(rng);
  const double n = v.norm();
  if (n < 1e-9) return base;
  return v / n;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double polyline_distance(const Eigen::Vector2d& p,
                         const std::vector<Eigen::Vector2d>& poly, bool closed) {
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i + 1 < poly.size(); ++i)
    best = std::min(best, point_segment_distance(p, poly[i], poly[i + 1]));
  if (closed && poly.size() > 2)
    best = std::min(best, point_segment_distance(p, poly.back(), poly.front()));
  return best;
}

}  // namespace

LabelSet make_label_set(const std::vector<std::string>& labels, int feature_dim,
                        uint64_t seed) {
  if (labels.empty()) throw std::invalid_argument("make_label_set: empty label list");
  for (size_t i = 0; i < labels.size(); ++i)
    for (size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j])
        throw std::invalid_argument("make_label_set: duplicate label " + labels[i]);
  std::mt19937_64 rng(seed);
  LabelSet set;
  set.labels = labels;
  set.prototypes.reserve(labels.size());
  for (size_t q = 0; q < labels.size(); ++q)
    set.prototypes.push_back(random_unit_vector(feature_dim, rng));
  return set;
}

std::vector<WorldLandmark> generate_world(uint64_t seed, const WorldSpec& spec,
                                          const LabelSet& labels) {
  if (labels.size() == 0) throw std::invalid_argument("generate_world: empty label set");
  if (spec.landmark_count < 1)
    throw std::invalid_argument("generate_world: landmark_count must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, spec.extent_x);
  std::uniform_real_distribution<double> uy(0.0, spec.extent_y);
  std::uniform_real_distribution<double> uz(0.0, 5.0);
  std::uniform_int_distribution<int> ulabel(0, static_cast<int>(labels.size()) - 1);

  std::vector<Eigen::Vector2d> centers;
  if (spec.placement == Placement::kClustered) {
    const int n_centers = std::max(1, spec.landmark_count / 20);
    for (int i = 0; i < n_centers; ++i) centers.emplace_back(ux(rng), uy(rng));
  }
  std::normal_distribution<double> cluster_spread(0.0, 15.0);

  std::vector<WorldLandmark> world;
  world.reserve(static_cast<size_t>(spec.landmark_count));
  int attempts = 0;
  const int max_attempts = 1000 * spec.landmark_count;
  while (static_cast<int>(world.size()) < spec.landmark_count) {
    if (++attempts > max_attempts)
      throw std::runtime_error("generate_world: cannot satisfy min_separation in area");
    Eigen::Vector2d xy;
    if (spec.placement == Placement::kClustered) {
      std::uniform_int_distribution<size_t> uc(0, centers.size() - 1);
      const Eigen::Vector2d& c = centers[uc(rng)];
      xy = Eigen::Vector2d(
          std::clamp(c.x() + cluster_spread(rng), 0.0, spec.extent_x),
          std::clamp(c.y() + cluster_spread(rng), 0.0, spec.extent_y));
    } else {
      xy = Eigen::Vector2d(ux(rng), uy(rng));
    }
    if (!spec.corridor.empty() &&
        polyline_distance(xy, spec.corridor, spec.corridor_closed) >
            spec.corridor_half_width)
      continue;
    bool ok = true;
    for (const auto& lm : world) {
      if ((lm.position.head<2>() - xy).norm() < spec.min_separation) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    WorldLandmark lm;
    lm.position = Eigen::Vector3d(xy.x(), xy.y(), uz(rng));
    lm.label_index = ulabel(rng);
    lm.feature = perturbed_feature(labels.prototypes[static_cast<size_t>(lm.label_index)],
                                   spec.feature_perturbation, rng);
    world.push_back(std::move(lm));
  }
  return world;
}

std::vector<Eigen::Vector2d> square_loop(const Eigen::Vector2d& origin, double side) {
  return {origin,
          origin + Eigen::Vector2d(side, 0.0),
          origin + Eigen::Vector2d(side, side),
          origin + Eigen::Vector2d(0.0, side)};
}

std::vector<Pose> generate_trajectory(const TrajectorySpec& spec) {
  std::vector<Eigen::Vector2d> wps = spec.waypoints;
  if (spec.reverse) std::reverse(wps.begin(), wps.end());
  if (spec.closed && !wps.empty()) wps.push_back(wps.front());
  if (wps.size() < 2)
    throw std::invalid_argument("generate_trajectory: need at least 2 waypoints");
  if (spec.step_length <= 0.0)
    throw std::invalid_argument("generate_trajectory: step_length must be > 0");

  double total = 0.0;
  for (size_t i = 0; i + 1 < wps.size(); ++i) {
    const double seg = (wps[i + 1] - wps[i]).norm();
    if (seg < 1e-9)
      throw std::invalid_argument("generate_trajectory: coincident waypoints");
    total += seg;
  }

  std::vector<Pose> poses;
  const int steps = static_cast<int>(std::floor(total / spec.step_length));
  size_t seg = 0;
  double seg_start = 0.0;
  double seg_len = (wps[1] - wps[0]).norm();
  for (int k = 0; k <= steps; ++k) {
    const double s = std::min(k * spec.step_length, total);
    while (s > seg_start + seg_len + 1e-12 && seg + 2 < wps.size()) {
      seg_start += seg_len;
      ++seg;
      seg_len = (wps[seg + 1] - wps[seg]).norm();
    }
    const double frac = std::clamp((s - seg_start) / seg_len, 0.0, 1.0);
    const Eigen::Vector2d pos = wps[seg] + frac * (wps[seg + 1] - wps[seg]);
    const Eigen::Vector2d dir = (wps[seg + 1] - wps[seg]).normalized();
    const double yaw = normalize_angle(std::atan2(dir.y(), dir.x()) + spec.heading_offset);
    poses.push_back(pose_from_xyyaw(pos.x(), pos.y(), yaw));
  }
  return poses;
}

std::vector<DetectionFrame> simulate_run(const std::vector<WorldLandmark>& world,
                                         const std::vector<Pose>& trajectory,
                                         const LabelSet& labels,
                                         const SensorModel& sensor,
                                         const OdomNoise& odom_noise,
                                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const bool full_fov = sensor.fov_horizontal >= 2.0 * M_PI - 1e-9;
  std::vector<DetectionFrame> frames;
  frames.reserve(trajectory.size());

  for (size_t t = 0; t < trajectory.size(); ++t) {
    DetectionFrame frame;
    frame.frame_index = static_cast<int>(t);
    frame.ground_truth_pose = trajectory[t];

    if (t == 0) {
      frame.odometry_step = Pose::Identity();
    } else {
      Pose step = compose(inverse(trajectory[t - 1]), trajectory[t]);
      if (odom_noise.trans_sigma > 0.0)
        for (int i = 0; i < 3; ++i)
          step.translation(i) += odom_noise.trans_sigma * gauss(rng);
      if (odom_noise.rot_sigma > 0.0) {
        const double eps = odom_noise.rot_sigma * gauss(rng);
        step.rotation = step.rotation * rotation_from_euler({0.0, 0.0, eps});
      }
      frame.odometry_step = step;
    }

    const Pose sensor_inv = inverse(trajectory[t]);
    for (const auto& lm : world) {
      const Eigen::Vector3d local = transform_point(sensor_inv, lm.position);
      if (local.norm() > sensor.max_range) continue;
      if (!full_fov &&
          std::abs(std::atan2(local.y(), local.x())) > sensor.fov_horizontal / 2.0)
        continue;
      if (u01(rng) > sensor.detect_prob) continue;

      Detection det;
      det.centroid_local = local;
      if (sensor.centroid_sigma > 0.0)
        for (int i = 0; i < 3; ++i)
          det.centroid_local(i) += sensor.centroid_sigma * gauss(rng);

      int label_index = lm.label_index;
      Eigen::VectorXd base = lm.feature;
      if (sensor.confusion_prob > 0.0 && u01(rng) < sensor.confusion_prob) {
        // Misclassification: swap to a different class entirely.
        std::uniform_int_distribution<int> other(0, static_cast<int>(labels.size()) - 2);
        int q = other(rng);
        if (q >= label_index) ++q;
        label_index = q;
        base = labels.prototypes[static_cast<size_t>(q)];
      }
      det.feature = perturbed_feature(base, sensor.feature_noise_sigma, rng);
      det.label = labels.labels[static_cast<size_t>(label_index)];
      det.confidence = 0.5 + 0.5 * u01(rng);

      if (sensor.cluster_points > 0) {
        det.points_local.reserve(static_cast<size_t>(sensor.cluster_points));
        for (int i = 0; i < sensor.cluster_points; ++i) {
          Eigen::Vector3d p = det.centroid_local;
          for (int j = 0; j < 3; ++j) p(j) += sensor.cluster_sigma * gauss(rng);
          det.points_local.push_back(p);
        }
      }
      frame.detections.push_back(std::move(det));
    }

    if (sensor.false_positive_rate > 0.0) {
      std::poisson_distribution<int> pois(sensor.false_positive_rate);
      std::uniform_int_distribution<int> ulabel(0, static_cast<int>(labels.size()) - 1);
      const int n_fp = pois(rng);
      for (int i = 0; i < n_fp; ++i) {
        Detection det;
        const double r = sensor.max_range * std::sqrt(u01(rng));
        const double bearing = (u01(rng) - 0.5) *
            (full_fov ? 2.0 * M_PI : sensor.fov_horizontal);
        det.centroid_local = Eigen::Vector3d(r * std::cos(bearing), r * std::sin(bearing),
                                             5.0 * u01(rng));
        const int q = ulabel(rng);
        det.feature = perturbed_feature(labels.prototypes[static_cast<size_t>(q)],
                                        sensor.feature_noise_sigma, rng);
        det.label = labels.labels[static_cast<size_t>(q)];
        det.confidence = 0.1 + 0.5 * u01(rng);
        frame.detections.push_back(std::move(det));
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace sparseloc
