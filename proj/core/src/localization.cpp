#include "sparseloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace sparseloc {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t stream, uint64_t step) {
  // splitmix64 over the (seed, stream, step) triple
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * step;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<Particle> init_particles(const SparseMap& map,
                                     const LocalizationConfig& cfg, uint64_t seed) {
  if (map.instances.empty())
    throw std::invalid_argument("init_particles: empty map");
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& inst : map.instances) {
    xmin = std::min(xmin, inst.centroid.x());
    xmax = std::max(xmax, inst.centroid.x());
    ymin = std::min(ymin, inst.centroid.y());
    ymax = std::max(ymax, inst.centroid.y());
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(xmin, xmax), uy(ymin, ymax);
  std::uniform_real_distribution<double> uyaw(-M_PI, M_PI);
  std::vector<Particle> particles(static_cast<size_t>(cfg.particle_count));
  for (auto& p : particles) {
    p.pose = pose_from_xyyaw(ux(rng), uy(rng), normalize_angle(uyaw(rng)));
    p.weight = 1.0 / cfg.particle_count;
  }
  return particles;
}

void predict(std::vector<Particle>& particles, const Pose& odometry_step,
             const LocalizationConfig& cfg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& p : particles) {
    p.pose = compose(p.pose, odometry_step);
    if (cfg.pred_trans_sigma > 0.0)
      for (int i = 0; i < 3; ++i)
        p.pose.translation(i) += cfg.pred_trans_sigma * gauss(rng);
    if (cfg.pred_rot_sigma > 0.0) {
      const double eps = cfg.pred_rot_sigma * gauss(rng);
      p.pose.rotation = p.pose.rotation * rotation_from_euler({0.0, 0.0, eps});
    }
  }
}

std::optional<ScoreBreakdown> score_pair(const Detection& detection,
                                         const MapInstance& candidate,
                                         const Pose& particle_pose,
                                         const LocalizationConfig& cfg) {
  const Eigen::Vector3d expected =
      transform_point(inverse(particle_pose), candidate.centroid);
  const double expected_norm = expected.norm();
  const double observed_norm = detection.centroid_local.norm();
  if (expected_norm < 1e-9 || observed_norm < 1e-9) return std::nullopt;

  ScoreBreakdown s;
  s.phi_sem = semantic_affinity(detection.feature, candidate.feature);
  s.e_d = (expected - detection.centroid_local).norm();
  s.phi_dist = std::exp(-s.e_d / cfg.alpha_dist);

  const Eigen::Vector3d d_obs = detection.centroid_local / observed_norm;
  const Eigen::Vector3d d_exp = expected / expected_norm;
  double angle_sum = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double th_obs = std::acos(std::clamp(d_obs(axis), -1.0, 1.0));
    const double th_exp = std::acos(std::clamp(d_exp(axis), -1.0, 1.0));
    s.delta_theta(axis) = th_obs - th_exp;
    angle_sum += std::cos(s.delta_theta(axis));
  }
  s.phi_angle = angle_sum / 3.0 + cfg.beta() / 2.0;
  s.phi_total = s.phi_sem * s.phi_dist + s.phi_angle;
  return s;
}

namespace {

struct CandidateRef {
  int index;
  double phi_sem;
};

double particle_raw_score(const Particle& particle,
                          const std::vector<Detection>& detections,
                          const std::vector<std::vector<CandidateRef>>& candidates,
                          const SparseMap& map, const LocalizationConfig& cfg) {
  const double gate2 = cfg.candidate_radius * cfg.candidate_radius;
  const Pose particle_inv = inverse(particle.pose);
  double raw = 0.0;
  for (size_t j = 0; j < detections.size(); ++j) {
    double best = 0.0;
    bool any = false;
    const double observed_norm = detections[j].centroid_local.norm();
    if (observed_norm < 1e-9) continue;
    const Eigen::Vector3d d_obs = detections[j].centroid_local / observed_norm;
    for (const auto& cand : candidates[j]) {
      const auto& inst = map.instances[static_cast<size_t>(cand.index)];
      if ((inst.centroid - particle.pose.translation).squaredNorm() > gate2) continue;
      // Inlined score_pair with phi_sem reused from the precomputed filter.
      const Eigen::Vector3d expected = transform_point(particle_inv, inst.centroid);
      const double expected_norm = expected.norm();
      if (expected_norm < 1e-9) continue;
      const double e_d = (expected - detections[j].centroid_local).norm();
      const double phi_dist = std::exp(-e_d / cfg.alpha_dist);
      const Eigen::Vector3d d_exp = expected / expected_norm;
      double angle_sum = 0.0;
      for (int axis = 0; axis < 3; ++axis) {
        const double th_obs = std::acos(std::clamp(d_obs(axis), -1.0, 1.0));
        const double th_exp = std::acos(std::clamp(d_exp(axis), -1.0, 1.0));
        angle_sum += std::cos(th_obs - th_exp);
      }
      const double phi_angle = angle_sum / 3.0 + cfg.beta() / 2.0;
      const double phi_total = cand.phi_sem * phi_dist + phi_angle;
      if (!any || phi_total > best) {
        best = phi_total;
        any = true;
      }
    }
    if (any) raw += best;
  }
  return raw;
}

}  // namespace

void update_weights(std::vector<Particle>& particles,
                    const std::vector<Detection>& detections, const SparseMap& map,
                    const LocalizationConfig& cfg) {
  if (particles.empty()) return;
  if (detections.empty()) {
    for (auto& p : particles) p.weight = 1.0 / static_cast<double>(particles.size());
    return;
  }

  // Semantic filtering is particle-independent, do it once per detection.
  std::vector<std::vector<CandidateRef>> candidates(detections.size());
  for (size_t j = 0; j < detections.size(); ++j) {
    for (size_t k = 0; k < map.instances.size(); ++k) {
      const double phi_sem =
          semantic_affinity(detections[j].feature, map.instances[k].feature);
      if (phi_sem > cfg.delta_sem)
        candidates[j].push_back({static_cast<int>(k), phi_sem});
    }
  }

  std::vector<double> raw(particles.size(), 0.0);
  const int n_threads = std::max(1, cfg.threads);
  if (n_threads == 1 || particles.size() < 64) {
    for (size_t i = 0; i < particles.size(); ++i)
      raw[i] = particle_raw_score(particles[i], detections, candidates, map, cfg);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (particles.size() + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const size_t lo = t * chunk;
      const size_t hi = std::min(particles.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (size_t i = lo; i < hi; ++i)
          raw[i] = particle_raw_score(particles[i], detections, candidates, map, cfg);
      });
    }
    for (auto& th : pool) th.join();
  }

  const std::vector<double> w = softmax_weights(raw, cfg.softmax_temp);
  for (size_t i = 0; i < particles.size(); ++i) particles[i].weight = w[i];
}

std::vector<double> softmax_weights(const std::vector<double>& raw, double temp) {
  if (raw.empty()) throw std::invalid_argument("softmax_weights: empty input");
  if (!(temp > 0.0)) throw std::invalid_argument("softmax_weights: temp must be > 0");
  const double max_raw = *std::max_element(raw.begin(), raw.end());
  std::vector<double> w(raw.size());
  double sum = 0.0;
  for (size_t i = 0; i < raw.size(); ++i) {
    // floor at the smallest normal double so extreme score gaps cannot
    // underflow a weight to exactly zero
    w[i] = std::max(std::exp((raw[i] - max_raw) / temp),
                    std::numeric_limits<double>::min());
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

double effective_sample_size(const std::vector<Particle>& particles) {
  double sum_sq = 0.0;
  for (const auto& p : particles) sum_sq += p.weight * p.weight;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

void resample(std::vector<Particle>& particles, uint64_t seed) {
  const size_t n = particles.size();
  if (n == 0) return;
  double total = 0.0;
  for (const auto& p : particles) total += p.weight;
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("resample: degenerate weights");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0 / static_cast<double>(n));
  const double r = u(rng);
  std::vector<Particle> out;
  out.reserve(n);
  double c = particles[0].weight / total;
  size_t i = 0;
  for (size_t m = 0; m < n; ++m) {
    const double target = r + static_cast<double>(m) / static_cast<double>(n);
    while (target > c && i + 1 < n) {
      ++i;
      c += particles[i].weight / total;
    }
    out.push_back(particles[i]);
    out.back().weight = 1.0 / static_cast<double>(n);
  }
  particles = std::move(out);
}

Pose estimate_pose(const std::vector<Particle>& particles,
                   const LocalizationConfig& cfg) {
  if (particles.empty()) throw std::invalid_argument("estimate_pose: empty ensemble");
  std::vector<Pose> poses;
  std::vector<double> weights;
  std::vector<double> roll, pitch, yaw;
  poses.reserve(particles.size());
  weights.reserve(particles.size());
  for (const auto& p : particles) {
    poses.push_back(p.pose);
    weights.push_back(p.weight);
    const EulerAngles e = euler_from_rotation(p.pose.rotation);
    roll.push_back(e.roll);
    pitch.push_back(e.pitch);
    yaw.push_back(e.yaw);
  }
  Pose out;
  out.translation = weighted_translation_mean(poses, weights, cfg.gamma);
  out.rotation = rotation_from_euler({circular_mean(roll, weights, cfg.gamma),
                                      circular_mean(pitch, weights, cfg.gamma),
                                      circular_mean(yaw, weights, cfg.gamma)});
  return out;
}

double position_dispersion(const std::vector<Particle>& particles) {
  double wsum = 0.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : particles) {
    mean += p.weight * p.pose.translation;
    wsum += p.weight;
  }
  if (wsum <= 0.0) return std::numeric_limits<double>::infinity();
  mean /= wsum;
  double var = 0.0;
  for (const auto& p : particles)
    var += (p.weight / wsum) * (p.pose.translation - mean).squaredNorm();
  return std::sqrt(var);
}

bool ConvergenceMonitor::update(double dispersion, const LocalizationConfig& cfg) {
  streak_ = dispersion < cfg.convergence_dispersion ? streak_ + 1 : 0;
  if (streak_ >= cfg.convergence_frames) converged_ = true;
  return converged_;
}

MonteCarloLocalizer::MonteCarloLocalizer(const SparseMap& map,
                                         LocalizationConfig cfg, uint64_t seed)
    : map_(map), cfg_(std::move(cfg)), seed_(seed) {
  particles_ = init_particles(map_, cfg_, mix_seed(seed_, 0, 0));
}

LocalizerStepResult MonteCarloLocalizer::step(const DetectionFrame& frame) {
  const uint64_t step_idx = static_cast<uint64_t>(frame_count_++);
  if (step_idx > 0)
    predict(particles_, frame.odometry_step, cfg_, mix_seed(seed_, 1, step_idx));

  update_weights(particles_, frame.detections, map_, cfg_);

  LocalizerStepResult result;
  result.estimate = estimate_pose(particles_, cfg_);
  result.neff = effective_sample_size(particles_);
  result.dispersion = position_dispersion(particles_);
  result.converged = monitor_.update(result.dispersion, cfg_);

  ++frames_since_resample_;
  const bool periodic = frames_since_resample_ >= cfg_.resample_period;
  const bool degenerate = result.neff < cfg_.neff_fraction * cfg_.particle_count;
  if (!frame.detections.empty() && (periodic || degenerate)) {
    resample(particles_, mix_seed(seed_, 2, step_idx));
    frames_since_resample_ = 0;
  }
  return result;
}

}  // namespace sparseloc
