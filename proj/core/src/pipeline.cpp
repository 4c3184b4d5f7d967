#include "sparseloc/pipeline.hpp"

#include "sparseloc/late_opt.hpp"
#include "sparseloc/localization.hpp"

namespace sparseloc {

SimulationResult simulate(const ExperimentConfig& cfg) {
  SimulationResult r;
  r.label_set = make_label_set(cfg.labels, cfg.feature_dim, cfg.seed);
  r.world = generate_world(cfg.seed + 1, cfg.world, r.label_set);
  r.trajectory = generate_trajectory(cfg.trajectory);
  r.frames = simulate_run(r.world, r.trajectory, r.label_set, cfg.sensor,
                          cfg.odom_noise, cfg.seed + 2);
  return r;
}

SparseMap build_map_from_frames(const std::vector<DetectionFrame>& frames,
                                const LabelSet& label_set, const MappingConfig& cfg) {
  std::vector<Pose> poses;
  poses.reserve(frames.size());
  for (const auto& f : frames) {
    if (!f.ground_truth_pose)
      throw std::invalid_argument("build_map_from_frames: frames lack mapping poses");
    poses.push_back(*f.ground_truth_pose);
  }
  return build_map(frames, poses, label_set, cfg);
}

std::vector<TraceRecord> run_localization(const SparseMap& map,
                                          const std::vector<DetectionFrame>& frames,
                                          const ExperimentConfig& cfg) {
  MonteCarloLocalizer localizer(map, cfg.localization, cfg.seed);
  HistoryBuffer history(static_cast<size_t>(cfg.refine.history_window));
  std::vector<TraceRecord> trace;
  trace.reserve(frames.size());
  for (const auto& frame : frames) {
    const LocalizerStepResult step = localizer.step(frame);
    history.push(frame.detections, frame.odometry_step);
    TraceRecord rec;
    rec.frame = frame.frame_index;
    rec.coarse = step.estimate;
    rec.dispersion = step.dispersion;
    rec.neff = step.neff;
    rec.converged = step.converged;
    if (cfg.use_late_opt && step.converged)
      rec.refined = refine(history, step.estimate, map, cfg.refine);
    trace.push_back(std::move(rec));
  }
  return trace;
}

TraceEvaluation evaluate_trace(const std::vector<TraceRecord>& trace,
                               const std::vector<Pose>& ground_truth,
                               const std::vector<SuccessThreshold>& thresholds,
                               bool post_convergence_only) {
  if (trace.size() != ground_truth.size())
    throw std::invalid_argument("evaluate_trace: trace/ground-truth frame mismatch");

  TraceEvaluation ev;
  size_t start = 0;
  for (size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].converged) {
      ev.first_converged_frame = trace[i].frame;
      start = i;
      break;
    }
  }
  if (!post_convergence_only) start = 0;
  if (post_convergence_only && ev.first_converged_frame < 0)
    throw std::runtime_error("evaluate_trace: filter never converged");

  std::vector<Pose> coarse, refined, truth;
  bool any_refined = false;
  for (size_t i = start; i < trace.size(); ++i) {
    coarse.push_back(trace[i].coarse);
    refined.push_back(trace[i].refined ? *trace[i].refined : trace[i].coarse);
    if (trace[i].refined) any_refined = true;
    truth.push_back(ground_truth[i]);
  }
  ev.coarse = run_metrics(coarse, truth, thresholds);
  if (any_refined) {
    ev.refined = run_metrics(refined, truth, thresholds);
    if (ev.coarse.ate > 0.0)
      ev.improvement_pct = ablation_improvement(ev.coarse.ate, ev.refined->ate);
  }
  return ev;
}

json TraceEvaluation::to_json(const std::vector<SuccessThreshold>& thresholds) const {
  auto metrics_json = [&](const RunMetrics& m) {
    json th = json::array();
    for (size_t i = 0; i < thresholds.size(); ++i)
      th.push_back({{"max_trans_m", thresholds[i].max_trans},
                    {"max_rot_deg", thresholds[i].max_rot},
                    {"success_rate_pct", m.success_rate[i]}});
    return json{{"ate_m", m.ate},
                {"are_deg", m.are},
                {"frames_evaluated", m.frames_evaluated},
                {"thresholds", th}};
  };
  json j;
  j["first_converged_frame"] = first_converged_frame;
  j["coarse"] = metrics_json(coarse);
  if (refined) j["refined"] = metrics_json(*refined);
  if (improvement_pct) j["late_opt_improvement_pct"] = *improvement_pct;
  return j;
}

}  // namespace sparseloc
