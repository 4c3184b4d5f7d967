#include "sparseloc/config.hpp"

#include <cmath>
#include <stdexcept>

namespace sparseloc {

namespace {

json waypoints_to_json(const std::vector<Eigen::Vector2d>& wps) {
  json j = json::array();
  for (const auto& w : wps) j.push_back(json{w.x(), w.y()});
  return j;
}

std::vector<Eigen::Vector2d> waypoints_from_json(const json& j) {
  std::vector<Eigen::Vector2d> wps;
  for (const auto& w : j) wps.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
  return wps;
}

template <typename T>
T require(const json& j, const std::string& field) {
  if (!j.contains(field))
    throw std::invalid_argument("config: missing required field '" + field + "'");
  return j.at(field).get<T>();
}

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: invalid value for " + what);
}

}  // namespace

json ExperimentConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["feature_dim"] = feature_dim;
  j["labels"] = labels;
  j["world"] = {{"extent_x", world.extent_x},
                {"extent_y", world.extent_y},
                {"landmark_count", world.landmark_count},
                {"placement", world.placement == Placement::kClustered ? "clustered" : "uniform"},
                {"min_separation", world.min_separation},
                {"feature_perturbation", world.feature_perturbation},
                {"corridor", waypoints_to_json(world.corridor)},
                {"corridor_half_width", world.corridor_half_width},
                {"corridor_closed", world.corridor_closed}};
  j["trajectory"] = {{"waypoints", waypoints_to_json(trajectory.waypoints)},
                     {"step_length", trajectory.step_length},
                     {"closed", trajectory.closed},
                     {"reverse", trajectory.reverse},
                     {"heading_offset", trajectory.heading_offset}};
  j["sensor"] = {{"max_range", sensor.max_range},
                 {"fov_horizontal", sensor.fov_horizontal},
                 {"detect_prob", sensor.detect_prob},
                 {"centroid_sigma", sensor.centroid_sigma},
                 {"feature_noise_sigma", sensor.feature_noise_sigma},
                 {"confusion_prob", sensor.confusion_prob},
                 {"false_positive_rate", sensor.false_positive_rate},
                 {"cluster_points", sensor.cluster_points},
                 {"cluster_sigma", sensor.cluster_sigma}};
  j["odom_noise"] = {{"trans_sigma", odom_noise.trans_sigma},
                     {"rot_sigma", odom_noise.rot_sigma}};
  j["mapping"] = {{"delta_sim", mapping.delta_sim},
                  {"geo_radius", mapping.geo_radius},
                  {"dbscan_eps", mapping.dbscan_eps},
                  {"dbscan_min_pts", mapping.dbscan_min_pts},
                  {"min_semantic", mapping.min_semantic}};
  j["localization"] = {{"particle_count", localization.particle_count},
                       {"delta_sem", localization.delta_sem},
                       {"alpha_dist", localization.alpha_dist},
                       {"lambda_scale", localization.lambda_scale},
                       {"softmax_temp", localization.softmax_temp},
                       {"gamma", localization.gamma},
                       {"pred_trans_sigma", localization.pred_trans_sigma},
                       {"pred_rot_sigma", localization.pred_rot_sigma},
                       {"resample_period", localization.resample_period},
                       {"neff_fraction", localization.neff_fraction},
                       {"candidate_radius", localization.candidate_radius},
                       {"convergence_dispersion", localization.convergence_dispersion},
                       {"convergence_frames", localization.convergence_frames}};
  j["refine"] = {{"history_window", refine.history_window},
                 {"max_pair_distance", refine.max_pair_distance},
                 {"ransac_iters", refine.ransac_iters},
                 {"ransac_inlier_thresh", refine.ransac_inlier_thresh},
                 {"huber_delta", refine.huber_delta},
                 {"min_pairs", refine.min_pairs},
                 {"solver", refine.solver == RefineSolver::kHuberIrls ? "huber_irls"
                                                                      : "procrustes_ransac"},
                 {"min_semantic", refine.min_semantic},
                 {"semantic_weights", refine.semantic_weights}};
  j["use_late_opt"] = use_late_opt;
  json th = json::array();
  for (const auto& t : thresholds) th.push_back(json{t.max_trans, t.max_rot});
  j["thresholds"] = th;
  j["eval_post_convergence"] = eval_post_convergence;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.seed = require<uint64_t>(j, "seed");
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.labels = require<std::vector<std::string>>(j, "labels");

  if (j.contains("world")) {
    const json& w = j.at("world");
    c.world.extent_x = w.value("extent_x", c.world.extent_x);
    c.world.extent_y = w.value("extent_y", c.world.extent_y);
    c.world.landmark_count = w.value("landmark_count", c.world.landmark_count);
    const std::string placement = w.value("placement", "uniform");
    check(placement == "uniform" || placement == "clustered", "world.placement");
    c.world.placement =
        placement == "clustered" ? Placement::kClustered : Placement::kUniform;
    c.world.min_separation = w.value("min_separation", c.world.min_separation);
    c.world.feature_perturbation =
        w.value("feature_perturbation", c.world.feature_perturbation);
    if (w.contains("corridor")) c.world.corridor = waypoints_from_json(w.at("corridor"));
    c.world.corridor_half_width =
        w.value("corridor_half_width", c.world.corridor_half_width);
    c.world.corridor_closed = w.value("corridor_closed", c.world.corridor_closed);
  }
  {
    const json& t = j.contains("trajectory") ? j.at("trajectory") : json::object();
    if (!t.contains("waypoints"))
      throw std::invalid_argument("config: missing required field 'trajectory.waypoints'");
    c.trajectory.waypoints = waypoints_from_json(t.at("waypoints"));
    c.trajectory.step_length = t.value("step_length", c.trajectory.step_length);
    c.trajectory.closed = t.value("closed", c.trajectory.closed);
    c.trajectory.reverse = t.value("reverse", c.trajectory.reverse);
    c.trajectory.heading_offset = t.value("heading_offset", c.trajectory.heading_offset);
  }
  if (j.contains("sensor")) {
    const json& s = j.at("sensor");
    c.sensor.max_range = s.value("max_range", c.sensor.max_range);
    c.sensor.fov_horizontal = s.value("fov_horizontal", c.sensor.fov_horizontal);
    c.sensor.detect_prob = s.value("detect_prob", c.sensor.detect_prob);
    c.sensor.centroid_sigma = s.value("centroid_sigma", c.sensor.centroid_sigma);
    c.sensor.feature_noise_sigma =
        s.value("feature_noise_sigma", c.sensor.feature_noise_sigma);
    c.sensor.confusion_prob = s.value("confusion_prob", c.sensor.confusion_prob);
    c.sensor.false_positive_rate =
        s.value("false_positive_rate", c.sensor.false_positive_rate);
    c.sensor.cluster_points = s.value("cluster_points", c.sensor.cluster_points);
    c.sensor.cluster_sigma = s.value("cluster_sigma", c.sensor.cluster_sigma);
  }
  if (j.contains("odom_noise")) {
    const json& o = j.at("odom_noise");
    c.odom_noise.trans_sigma = o.value("trans_sigma", c.odom_noise.trans_sigma);
    c.odom_noise.rot_sigma = o.value("rot_sigma", c.odom_noise.rot_sigma);
  }
  if (j.contains("mapping")) {
    const json& m = j.at("mapping");
    c.mapping.delta_sim = m.value("delta_sim", c.mapping.delta_sim);
    c.mapping.geo_radius = m.value("geo_radius", c.mapping.geo_radius);
    c.mapping.dbscan_eps = m.value("dbscan_eps", c.mapping.dbscan_eps);
    c.mapping.dbscan_min_pts = m.value("dbscan_min_pts", c.mapping.dbscan_min_pts);
    c.mapping.min_semantic = m.value("min_semantic", c.mapping.min_semantic);
  }
  if (j.contains("localization")) {
    const json& l = j.at("localization");
    c.localization.particle_count = l.value("particle_count", c.localization.particle_count);
    c.localization.delta_sem = l.value("delta_sem", c.localization.delta_sem);
    c.localization.alpha_dist = l.value("alpha_dist", c.localization.alpha_dist);
    c.localization.lambda_scale = l.value("lambda_scale", c.localization.lambda_scale);
    c.localization.softmax_temp = l.value("softmax_temp", c.localization.softmax_temp);
    c.localization.gamma = l.value("gamma", c.localization.gamma);
    c.localization.pred_trans_sigma =
        l.value("pred_trans_sigma", c.localization.pred_trans_sigma);
    c.localization.pred_rot_sigma =
        l.value("pred_rot_sigma", c.localization.pred_rot_sigma);
    c.localization.resample_period =
        l.value("resample_period", c.localization.resample_period);
    c.localization.neff_fraction = l.value("neff_fraction", c.localization.neff_fraction);
    c.localization.candidate_radius =
        l.value("candidate_radius", c.localization.candidate_radius);
    c.localization.convergence_dispersion =
        l.value("convergence_dispersion", c.localization.convergence_dispersion);
    c.localization.convergence_frames =
        l.value("convergence_frames", c.localization.convergence_frames);
  }
  if (j.contains("refine")) {
    const json& r = j.at("refine");
    c.refine.history_window = r.value("history_window", c.refine.history_window);
    c.refine.max_pair_distance = r.value("max_pair_distance", c.refine.max_pair_distance);
    c.refine.ransac_iters = r.value("ransac_iters", c.refine.ransac_iters);
    c.refine.ransac_inlier_thresh =
        r.value("ransac_inlier_thresh", c.refine.ransac_inlier_thresh);
    c.refine.huber_delta = r.value("huber_delta", c.refine.huber_delta);
    c.refine.min_pairs = r.value("min_pairs", c.refine.min_pairs);
    const std::string solver = r.value("solver", "procrustes_ransac");
    check(solver == "procrustes_ransac" || solver == "huber_irls", "refine.solver");
    c.refine.solver = solver == "huber_irls" ? RefineSolver::kHuberIrls
                                             : RefineSolver::kProcrustesRansac;
    c.refine.min_semantic = r.value("min_semantic", c.refine.min_semantic);
    c.refine.semantic_weights = r.value("semantic_weights", c.refine.semantic_weights);
  }
  c.use_late_opt = j.value("use_late_opt", c.use_late_opt);
  if (j.contains("thresholds")) {
    c.thresholds.clear();
    for (const auto& t : j.at("thresholds"))
      c.thresholds.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
    if (c.thresholds.empty()) c.thresholds = default_thresholds();
  }
  c.eval_post_convergence = j.value("eval_post_convergence", c.eval_post_convergence);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  check(feature_dim >= 2, "feature_dim");
  check(!labels.empty(), "labels");
  check(world.landmark_count >= 1, "world.landmark_count");
  check(world.extent_x > 0.0 && world.extent_y > 0.0, "world.extent");
  check(trajectory.step_length > 0.0, "trajectory.step_length");
  check(sensor.detect_prob >= 0.0 && sensor.detect_prob <= 1.0, "sensor.detect_prob");
  check(sensor.confusion_prob >= 0.0 && sensor.confusion_prob <= 1.0,
        "sensor.confusion_prob");
  check(sensor.centroid_sigma >= 0.0, "sensor.centroid_sigma");
  check(sensor.feature_noise_sigma >= 0.0, "sensor.feature_noise_sigma");
  check(mapping.delta_sim > 0.0 && mapping.delta_sim < 2.0, "mapping.delta_sim");
  check(mapping.geo_radius > 0.0, "mapping.geo_radius");
  check(mapping.dbscan_eps > 0.0, "mapping.dbscan_eps");
  check(localization.particle_count >= 1, "localization.particle_count");
  check(localization.delta_sem > 0.0 && localization.delta_sem < 1.0,
        "localization.delta_sem");
  check(localization.alpha_dist > 0.0, "localization.alpha_dist");
  check(localization.softmax_temp > 0.0, "localization.softmax_temp");
  check(localization.lambda_scale > 0.0, "localization.lambda_scale");
  check(refine.max_pair_distance > 0.0, "refine.max_pair_distance");
  check(refine.ransac_inlier_thresh > 0.0, "refine.ransac_inlier_thresh");
  check(refine.huber_delta > 0.0, "refine.huber_delta");
  check(refine.min_pairs >= 3, "refine.min_pairs");
  check(refine.history_window >= 1, "refine.history_window");
  for (const auto& t : thresholds)
    check(t.max_trans > 0.0 && t.max_rot > 0.0, "thresholds");
}

std::string ExperimentConfig::hash() const {
  const std::string s = to_json().dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace presets {

ExperimentConfig town_loop(uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.labels = {"tree",        "street lamp", "traffic sign", "mailbox",
              "fire hydrant", "bench",       "billboard",    "fountain",
              "statue",       "bus stop",    "phone booth",  "planter"};
  c.world.extent_x = 400.0;
  c.world.extent_y = 400.0;
  c.world.landmark_count = 300;
  c.world.min_separation = 4.0;
  c.trajectory.waypoints = square_loop({12.5, 12.5}, 375.0);  // 1500 m loop
  c.trajectory.closed = true;
  c.trajectory.step_length = 3.75;  // ~400 frames
  // Landmarks line the streets: everything sits within sensing range of the loop.
  c.world.corridor = c.trajectory.waypoints;
  c.world.corridor_closed = true;
  c.world.corridor_half_width = 50.0;
  c.sensor.max_range = 60.0;
  c.sensor.fov_horizontal = 2.0 * M_PI;
  c.sensor.detect_prob = 0.9;
  c.sensor.centroid_sigma = 0.3;
  c.sensor.feature_noise_sigma = 0.05;
  c.odom_noise.trans_sigma = 0.05;
  c.odom_noise.rot_sigma = 0.5 * M_PI / 180.0;
  c.mapping.delta_sim = 1.2;
  c.localization.alpha_dist = 10.0;
  c.localization.delta_sem = 0.95;
  c.localization.softmax_temp = 1.2;
  c.localization.pred_trans_sigma = 1.1;
  c.localization.pred_rot_sigma = 0.01;
  c.localization.resample_period = 2;
  c.localization.neff_fraction = 0.5;
  c.localization.convergence_dispersion = 5.0;
  c.localization.convergence_frames = 14;
  c.localization.threads = 8;
  c.refine.max_pair_distance = 12.0;
  return c;
}

}  // namespace presets

}  // namespace sparseloc
