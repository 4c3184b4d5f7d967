#pragma once

#include "sparseloc/config.hpp"
#include "sparseloc/io.hpp"

namespace sparseloc {

struct SimulationResult {
  LabelSet label_set;
  std::vector<WorldLandmark> world;
  std::vector<Pose> trajectory;
  std::vector<DetectionFrame> frames;
};

SimulationResult simulate(const ExperimentConfig& cfg);

/// Map construction from ground-truth-posed frames, as in the offline stage.
SparseMap build_map_from_frames(const std::vector<DetectionFrame>& frames,
                                const LabelSet& label_set, const MappingConfig& cfg);

/// Full online stage: particle filter plus late optimization per frame
/// once converged.
std::vector<TraceRecord> run_localization(const SparseMap& map,
                                          const std::vector<DetectionFrame>& frames,
                                          const ExperimentConfig& cfg);

struct TraceEvaluation {
  RunMetrics coarse;
  std::optional<RunMetrics> refined;
  std::optional<double> improvement_pct;  // ATE reduction from late opt
  int first_converged_frame = -1;
  json to_json(const std::vector<SuccessThreshold>& thresholds) const;
};

TraceEvaluation evaluate_trace(const std::vector<TraceRecord>& trace,
                               const std::vector<Pose>& ground_truth,
                               const std::vector<SuccessThreshold>& thresholds,
                               bool post_convergence_only);

}  // namespace sparseloc
