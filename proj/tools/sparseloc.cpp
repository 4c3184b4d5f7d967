#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "sparseloc/pipeline.hpp"

namespace {

using namespace sparseloc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

ExperimentConfig load_config(const std::string& path, bool has_seed, uint64_t seed) {
  json j = read_json_file(path);
  if (has_seed) j["seed"] = seed;
  return ExperimentConfig::from_json(j);
}

json artifact_meta(const ExperimentConfig& cfg) {
  return {{"seed", cfg.seed}, {"config_hash", cfg.hash()}, {"feature_dim", cfg.feature_dim}};
}

std::vector<SuccessThreshold> parse_thresholds(const std::vector<std::string>& specs) {
  if (specs.empty()) return default_thresholds();
  std::vector<SuccessThreshold> out;
  for (const auto& s : specs) {
    double t = 0.0, r = 0.0;
    if (std::sscanf(s.c_str(), "%lf,%lf", &t, &r) != 2 || t <= 0.0 || r <= 0.0)
      throw std::invalid_argument("--threshold expects 'trans_m,rot_deg', got '" + s + "'");
    out.push_back({t, r});
  }
  return out;
}

int cmd_simulate(const std::string& config_path, bool has_seed, uint64_t seed,
                 const std::string& out_path, const std::string& gt_path, bool quiet) {
  const ExperimentConfig cfg = load_config(config_path, has_seed, seed);
  const SimulationResult sim = simulate(cfg);

  DetectionLog log;
  log.meta = artifact_meta(cfg);
  log.label_set = sim.label_set;
  log.frames = sim.frames;
  write_detection_log(out_path, log);
  if (!gt_path.empty()) write_ground_truth(gt_path, sim.trajectory, artifact_meta(cfg));

  if (!quiet) {
    size_t n_det = 0;
    for (const auto& f : sim.frames) n_det += f.detections.size();
    std::cout << "simulated " << sim.frames.size() << " frames, "
              << sim.world.size() << " landmarks, " << n_det << " detections -> "
              << out_path << "\n";
  }
  return kExitOk;
}

int cmd_build_map(const std::string& detections_path, const std::string& poses_path,
                  const std::string& config_path, bool has_seed, uint64_t seed,
                  const std::string& out_path, bool quiet) {
  const ExperimentConfig cfg = load_config(config_path, has_seed, seed);
  DetectionLog log = read_detection_log(detections_path);

  std::vector<Pose> poses;
  if (!poses_path.empty()) {
    poses = read_ground_truth(poses_path);
  } else {
    for (const auto& f : log.frames) {
      if (!f.ground_truth_pose)
        throw std::runtime_error("no poses file given and log lacks gt_pose records");
      poses.push_back(*f.ground_truth_pose);
    }
  }
  if (poses.size() != log.frames.size())
    throw std::runtime_error("frame/pose count mismatch: " +
                             std::to_string(log.frames.size()) + " frames vs " +
                             std::to_string(poses.size()) + " poses");

  const SparseMap map = build_map(log.frames, poses, log.label_set, cfg.mapping);
  if (map.instances.empty())
    std::cerr << "warning: built an empty map (no detections in log)\n";

  size_t raw_points = 0;
  for (const auto& f : log.frames)
    for (const auto& d : f.detections)
      raw_points += d.points_local.empty() ? 1 : d.points_local.size();

  json meta = artifact_meta(cfg);
  meta["raw_point_count"] = raw_points;
  save_map(out_path, map, meta);

  if (!quiet) {
    std::cout << "map instances K = " << map.size() << "\n";
    if (!map.instances.empty() && raw_points > 0) {
      const MapStats stats = map_stats(map, raw_points);
      std::cout << "sparsity ratio = " << stats.sparsity_ratio << " ("
                << raw_points << " raw points)\n";
    }
  }
  return kExitOk;
}

int cmd_localize(const std::string& map_path, const std::string& detections_path,
                 const std::string& config_path, bool has_seed, uint64_t seed,
                 const std::string& out_path, int threads, bool quiet) {
  ExperimentConfig cfg = load_config(config_path, has_seed, seed);
  cfg.localization.threads = threads;
  const SparseMap map = load_map(map_path);
  if (map.instances.empty()) throw std::runtime_error("map is empty: " + map_path);
  const DetectionLog log = read_detection_log(detections_path);

  if (map.label_set.labels != log.label_set.labels)
    std::cerr << "warning: map/log label sets differ, matching on features only\n";

  const std::vector<TraceRecord> trace = run_localization(map, log.frames, cfg);
  write_trace(out_path, trace, artifact_meta(cfg));

  if (!quiet) {
    int first = -1;
    for (const auto& r : trace)
      if (r.converged) {
        first = r.frame;
        break;
      }
    std::cout << "localized " << trace.size() << " frames, "
              << (first >= 0 ? "converged at frame " + std::to_string(first)
                             : std::string("never converged"))
              << " -> " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& trace_path, const std::string& gt_path,
                 const std::vector<std::string>& threshold_specs,
                 const std::string& out_path, bool all_frames, bool quiet) {
  const std::vector<TraceRecord> trace = read_trace(trace_path);
  const std::vector<Pose> gt = read_ground_truth(gt_path);
  const auto thresholds = parse_thresholds(threshold_specs);

  const TraceEvaluation ev = evaluate_trace(trace, gt, thresholds, !all_frames);
  const json report = ev.to_json(thresholds);
  if (!out_path.empty()) write_json_file(out_path, report);

  if (!quiet) std::cout << report.dump(2) << "\n";
  return kExitOk;
}

int cmd_bench(const std::string& config_path, int n_seeds, uint64_t first_seed,
              const std::string& out_path, int threads, bool quiet) {
  json base = read_json_file(config_path);
  std::ofstream csv(out_path);
  if (!csv) throw std::runtime_error("cannot open for writing: " + out_path);
  csv << "seed,converged_frame,coarse_ate_m,coarse_are_deg,refined_ate_m,"
         "refined_are_deg,improvement_pct,sr0_pct,sr1_pct\n";

  for (int s = 0; s < n_seeds; ++s) {
    base["seed"] = first_seed + static_cast<uint64_t>(s);
    ExperimentConfig cfg = ExperimentConfig::from_json(base);
    cfg.localization.threads = threads;

    const SimulationResult sim = simulate(cfg);
    const SparseMap map =
        build_map_from_frames(sim.frames, sim.label_set, cfg.mapping);
    const auto trace = run_localization(map, sim.frames, cfg);
    TraceEvaluation ev;
    try {
      ev = evaluate_trace(trace, sim.trajectory, cfg.thresholds,
                          cfg.eval_post_convergence);
    } catch (const std::runtime_error&) {
      csv << cfg.seed << ",-1,,,,,,,\n";
      continue;
    }
    csv << cfg.seed << "," << ev.first_converged_frame << "," << ev.coarse.ate << ","
        << ev.coarse.are << ",";
    if (ev.refined) csv << ev.refined->ate << "," << ev.refined->are;
    else csv << ",";
    csv << ",";
    if (ev.improvement_pct) csv << *ev.improvement_pct;
    csv << ",";
    if (ev.coarse.success_rate.size() > 0) csv << ev.coarse.success_rate[0];
    csv << ",";
    if (ev.coarse.success_rate.size() > 1) csv << ev.coarse.success_rate[1];
    csv << "\n";
    if (!quiet)
      std::cout << "seed " << cfg.seed << ": coarse ATE " << ev.coarse.ate << " m"
                << (ev.refined ? ", refined ATE " + std::to_string(ev.refined->ate) + " m"
                               : std::string())
                << "\n";
  }
  if (!quiet) std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse semantic-landmark mapping, global localization and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_path, gt_path, map_path, detections_path, poses_path,
      trace_path;
  std::vector<std::string> threshold_specs;
  uint64_t seed = 0, first_seed = 0;
  bool quiet = false, all_frames = false;
  int threads = 1, n_seeds = 5;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* sim = app.add_subcommand("simulate", "generate a detection log and ground truth");
  sim->add_option("--config", config_path, "experiment config JSON")->required();
  auto* sim_seed = sim->add_option("--seed", seed, "override the config seed");
  sim->add_option("--out", out_path, "output detection log (JSONL)")->required();
  sim->add_option("--gt", gt_path, "output ground-truth poses (JSONL)");
  add_common(sim);

  auto* bm = app.add_subcommand("build-map", "fuse a detection log into a sparse map");
  bm->add_option("--detections", detections_path, "detection log (JSONL)")->required();
  bm->add_option("--poses", poses_path, "mapping poses (ground-truth JSONL); "
                                        "defaults to gt_pose records in the log");
  bm->add_option("--config", config_path, "experiment config JSON")->required();
  auto* bm_seed = bm->add_option("--seed", seed, "override the config seed");
  bm->add_option("--out", out_path, "output map JSON")->required();
  add_common(bm);

  auto* loc = app.add_subcommand("localize", "run the particle filter over a log");
  loc->add_option("--map", map_path, "sparse map JSON")->required();
  loc->add_option("--detections", detections_path, "detection log (JSONL)")->required();
  loc->add_option("--config", config_path, "experiment config JSON")->required();
  auto* loc_seed = loc->add_option("--seed", seed, "override the config seed");
  loc->add_option("--out", out_path, "output trace (JSONL)")->required();
  loc->add_option("--threads", threads, "worker threads for particle scoring");
  add_common(loc);

  auto* ev = app.add_subcommand("evaluate", "score a trace against ground truth");
  ev->add_option("--trace", trace_path, "trace JSONL")->required();
  ev->add_option("--gt", gt_path, "ground-truth poses JSONL")->required();
  ev->add_option("--threshold", threshold_specs,
                 "success threshold 'trans_m,rot_deg' (repeatable; "
                 "default 4,3 and 10,5)");
  ev->add_option("--out", out_path, "write the JSON report here");
  ev->add_flag("--all-frames", all_frames, "score every frame, not just post-convergence");
  add_common(ev);

  auto* bench = app.add_subcommand("bench", "multi-seed sweep, aggregate CSV");
  bench->add_option("--config", config_path, "experiment config JSON")->required();
  bench->add_option("--seeds", n_seeds, "number of seeds to run");
  bench->add_option("--first-seed", first_seed, "first seed of the sweep");
  bench->add_option("--out", out_path, "output CSV")->required();
  bench->add_option("--threads", threads, "worker threads for particle scoring");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's fine-grained codes onto the 0/1 contract.
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, !sim_seed->empty(), seed, out_path, gt_path, quiet);
    if (bm->parsed())
      return cmd_build_map(detections_path, poses_path, config_path, !bm_seed->empty(),
                           seed, out_path, quiet);
    if (loc->parsed())
      return cmd_localize(map_path, detections_path, config_path, !loc_seed->empty(),
                          seed, out_path, threads, quiet);
    if (ev->parsed())
      return cmd_evaluate(trace_path, gt_path, threshold_specs, out_path, all_frames,
                          quiet);
    if (bench->parsed())
      return cmd_bench(config_path, n_seeds, first_seed, out_path, threads, quiet);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
