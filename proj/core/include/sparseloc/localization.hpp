#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sparseloc/mapping.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

struct Particle {
  Pose pose;
  double weight = 0.0;
};

struct LocalizationConfig {
  int particle_count = 1000;
  double delta_sem = 0.9;       // semantic candidate filter
  double alpha_dist = 1.0;      // distance-score decay scale (m)
  double lambda_scale = 1e-3;   // beta = 1 / (N * lambda)
  double softmax_temp = 0.5;    // divides raw scores
  double gamma = 1.0;           // weight exponent in pose estimation
  double pred_trans_sigma = 0.2;  // m per axis per prediction
  double pred_rot_sigma = 0.01;   // rad (yaw) per prediction
  int resample_period = 1;
  double neff_fraction = 0.5;
  double candidate_radius = 50.0;  // map-candidate gate around a particle (m)
  double convergence_dispersion = 5.0;  // m
  int convergence_frames = 3;
  int threads = 1;

  double beta() const { return 1.0 / (particle_count * lambda_scale); }
};

struct ScoreBreakdown {
  double phi_sem = 0.0;
  double phi_dist = 0.0;
  double phi_angle = 0.0;
  double phi_total = 0.0;
  double e_d = 0.0;
  Eigen::Vector3d delta_theta = Eigen::Vector3d::Zero();
};

std::vector<Particle> init_particles(const SparseMap& map,
                                     const LocalizationConfig& cfg, uint64_t seed);

void predict(std::vector<Particle>& particles, const Pose& odometry_step,
             const LocalizationConfig& cfg, uint64_t seed);

/// Scores one detection/map-candidate pair under a pose hypothesis.
/// Returns nullopt when either centroid sits at the sensor origin
/// (bearing undefined). The caller is responsible for the delta_sem gate.
std::optional<ScoreBreakdown> score_pair(const Detection& detection,
                                         const MapInstance& candidate,
                                         const Pose& particle_pose,
                                         const LocalizationConfig& cfg);

/// Replaces weights with softmax-normalized per-frame observation scores.
/// Empty detection sets reset the ensemble to uniform weights.
void update_weights(std::vector<Particle>& particles,
                    const std::vector<Detection>& detections, const SparseMap& map,
                    const LocalizationConfig& cfg);

/// Max-subtracted softmax with temperature; the normalization used by
/// update_weights. Invariant under adding a constant to all inputs.
std::vector<double> softmax_weights(const std::vector<double>& raw, double temp);

double effective_sample_size(const std::vector<Particle>& particles);

/// Systematic (low-variance) resampling; weights reset to 1/N.
void resample(std::vector<Particle>& particles, uint64_t seed);

Pose estimate_pose(const std::vector<Particle>& particles,
                   const LocalizationConfig& cfg);

/// Weighted standard deviation of particle positions (m).
double position_dispersion(const std::vector<Particle>& particles);

/// Tracks consecutive below-threshold dispersion calls.
class ConvergenceMonitor {
 public:
  bool update(double dispersion, const LocalizationConfig& cfg);
  bool converged() const { return converged_; }
  void reset() { streak_ = 0; converged_ = false; }

 private:
  int streak_ = 0;
  bool converged_ = false;
};

struct LocalizerStepResult {
  Pose estimate;
  double dispersion = 0.0;
  double neff = 0.0;
  bool converged = false;
};

/// Orchestrates one particle filter over a fixed map.
class MonteCarloLocalizer {
 public:
  MonteCarloLocalizer(const SparseMap& map, LocalizationConfig cfg, uint64_t seed);

  LocalizerStepResult step(const DetectionFrame& frame);

  const std::vector<Particle>& particles() const { return particles_; }
  bool converged() const { return monitor_.converged(); }

 private:
  const SparseMap& map_;
  LocalizationConfig cfg_;
  uint64_t seed_;
  int frame_count_ = 0;
  int frames_since_resample_ = 0;
  std::vector<Particle> particles_;
  ConvergenceMonitor monitor_;
};

}  // namespace sparseloc
