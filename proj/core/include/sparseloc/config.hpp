#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparseloc/io.hpp"
#include "sparseloc/late_opt.hpp"
#include "sparseloc/localization.hpp"
#include "sparseloc/mapping.hpp"
#include "sparseloc/metrics.hpp"
#include "sparseloc/world_sim.hpp"

namespace sparseloc {

/// Everything needed to reproduce one experiment end to end.
struct ExperimentConfig {
  uint64_t seed = 0;
  int feature_dim = 32;
  std::vector<std::string> labels;

  WorldSpec world;
  TrajectorySpec trajectory;
  SensorModel sensor;
  OdomNoise odom_noise;
  MappingConfig mapping;
  LocalizationConfig localization;
  RefineConfig refine;
  bool use_late_opt = true;

  std::vector<SuccessThreshold> thresholds = default_thresholds();
  bool eval_post_convergence = true;

  json to_json() const;
  static ExperimentConfig from_json(const json& j);

  /// FNV-1a over the canonical JSON encoding; embedded in every artifact.
  std::string hash() const;

  void validate() const;  // throws std::invalid_argument naming the field
};

namespace presets {

/// Desk-scale town loop: 300 landmarks spread over a 1500 m square loop.
ExperimentConfig town_loop(uint64_t seed);

}  // namespace presets

}  // namespace sparseloc
