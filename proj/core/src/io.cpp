#include "sparseloc/io.hpp"

#include <fstream>
#include <stdexcept>

namespace sparseloc {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

json pose_to_json(const Pose& p) {
  const auto a = pose_to_array(p);
  return json(a);
}

Pose pose_from_json(const json& j) {
  if (!j.is_array() || j.size() != 12)
    throw std::runtime_error("pose_from_json: expected 12-number array");
  std::array<double, 12> a{};
  for (size_t i = 0; i < 12; ++i) a[i] = j[i].get<double>();
  return pose_from_array(a);
}

json vector_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

json label_set_to_json(const LabelSet& set) {
  json protos = json::array();
  for (const auto& p : set.prototypes) protos.push_back(vector_to_json(p));
  return {{"labels", set.labels}, {"prototypes", protos}};
}

LabelSet label_set_from_json(const json& j) {
  LabelSet set;
  set.labels = j.at("labels").get<std::vector<std::string>>();
  for (const auto& p : j.at("prototypes")) set.prototypes.push_back(vector_from_json(p));
  if (set.labels.size() != set.prototypes.size())
    throw std::runtime_error("label set: labels/prototypes size mismatch");
  return set;
}

namespace {

json vec3_to_json(const Eigen::Vector3d& v) { return json{v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json detection_to_json(const Detection& d) {
  json j = {{"centroid", vec3_to_json(d.centroid_local)},
            {"feature", vector_to_json(d.feature)},
            {"label", d.label},
            {"confidence", d.confidence}};
  if (!d.points_local.empty()) {
    json pts = json::array();
    for (const auto& p : d.points_local) pts.push_back(vec3_to_json(p));
    j["points"] = pts;
  }
  return j;
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.centroid_local = vec3_from_json(j.at("centroid"));
  d.feature = vector_from_json(j.at("feature"));
  d.label = j.at("label").get<std::string>();
  d.confidence = j.at("confidence").get<double>();
  if (j.contains("points"))
    for (const auto& p : j.at("points")) d.points_local.push_back(vec3_from_json(p));
  return d;
}

}  // namespace

void write_detection_log(const std::string& path, const DetectionLog& log) {
  auto out = open_out(path);
  json meta = log.meta;
  meta["type"] = "detection_log";
  meta["label_set"] = label_set_to_json(log.label_set);
  out << meta.dump() << "\n";
  for (const auto& frame : log.frames) {
    json dets = json::array();
    for (const auto& d : frame.detections) dets.push_back(detection_to_json(d));
    json j = {{"frame", frame.frame_index},
              {"odom", pose_to_json(frame.odometry_step)},
              {"detections", dets}};
    if (frame.ground_truth_pose) j["gt_pose"] = pose_to_json(*frame.ground_truth_pose);
    out << j.dump() << "\n";
  }
}

DetectionLog read_detection_log(const std::string& path) {
  auto in = open_in(path);
  DetectionLog log;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("detection log is empty: " + path);
  log.meta = json::parse(line);
  if (log.meta.value("type", "") != "detection_log")
    throw std::runtime_error("not a detection log: " + path);
  log.label_set = label_set_from_json(log.meta.at("label_set"));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    DetectionFrame frame;
    frame.frame_index = j.at("frame").get<int>();
    frame.odometry_step = pose_from_json(j.at("odom"));
    if (j.contains("gt_pose")) frame.ground_truth_pose = pose_from_json(j.at("gt_pose"));
    for (const auto& d : j.at("detections"))
      frame.detections.push_back(detection_from_json(d));
    log.frames.push_back(std::move(frame));
  }
  return log;
}

void write_ground_truth(const std::string& path, const std::vector<Pose>& poses,
                        const json& meta) {
  auto out = open_out(path);
  json m = meta;
  m["type"] = "ground_truth";
  out << m.dump() << "\n";
  for (size_t i = 0; i < poses.size(); ++i) {
    const json j = {{"frame", i}, {"pose", pose_to_json(poses[i])}};
    out << j.dump() << "\n";
  }
}

std::vector<Pose> read_ground_truth(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("ground-truth file is empty: " + path);
  if (json::parse(line).value("type", "") != "ground_truth")
    throw std::runtime_error("not a ground-truth file: " + path);
  std::vector<Pose> poses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    poses.push_back(pose_from_json(json::parse(line).at("pose")));
  }
  return poses;
}

void write_trace(const std::string& path, const std::vector<TraceRecord>& trace,
                 const json& meta) {
  auto out = open_out(path);
  json m = meta;
  m["type"] = "trace";
  out << m.dump() << "\n";
  for (const auto& r : trace) {
    json j = {{"frame", r.frame},
              {"coarse", pose_to_json(r.coarse)},
              {"dispersion", r.dispersion},
              {"neff", r.neff},
              {"converged", r.converged}};
    if (r.refined) j["refined"] = pose_to_json(*r.refined);
    out << j.dump() << "\n";
  }
}

std::vector<TraceRecord> read_trace(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace is empty: " + path);
  if (json::parse(line).value("type", "") != "trace")
    throw std::runtime_error("not a trace file: " + path);
  std::vector<TraceRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TraceRecord r;
    r.frame = j.at("frame").get<int>();
    r.coarse = pose_from_json(j.at("coarse"));
    if (j.contains("refined")) r.refined = pose_from_json(j.at("refined"));
    r.dispersion = j.at("dispersion").get<double>();
    r.neff = j.at("neff").get<double>();
    r.converged = j.at("converged").get<bool>();
    trace.push_back(r);
  }
  return trace;
}

void save_map(const std::string& path, const SparseMap& map, const json& metadata) {
  json instances = json::array();
  for (const auto& inst : map.instances) {
    json j = {{"centroid", vec3_to_json(inst.centroid)},
              {"feature", vector_to_json(inst.feature)},
              {"label", inst.label},
              {"confidence", inst.confidence},
              {"obs_count", inst.observation_count}};
    if (!inst.points.empty()) {
      json pts = json::array();
      for (const auto& p : inst.points) pts.push_back(vec3_to_json(p));
      j["points"] = pts;
    }
    instances.push_back(std::move(j));
  }
  const json doc = {{"type", "sparse_map"},
                    {"label_set", label_set_to_json(map.label_set)},
                    {"instances", instances},
                    {"metadata", metadata}};
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

SparseMap load_map(const std::string& path, json* metadata) {
  auto in = open_in(path);
  json doc;
  in >> doc;
  if (doc.value("type", "") != "sparse_map")
    throw std::runtime_error("not a sparse map file: " + path);
  SparseMap map;
  map.label_set = label_set_from_json(doc.at("label_set"));
  for (const auto& j : doc.at("instances")) {
    MapInstance inst;
    inst.centroid = vec3_from_json(j.at("centroid"));
    inst.feature = vector_from_json(j.at("feature"));
    inst.label = j.at("label").get<std::string>();
    inst.confidence = j.at("confidence").get<double>();
    inst.observation_count = j.at("obs_count").get<int>();
    if (j.contains("points"))
      for (const auto& p : j.at("points")) inst.points.push_back(vec3_from_json(p));
    map.instances.push_back(std::move(inst));
  }
  if (metadata) *metadata = doc.value("metadata", json::object());
  return map;
}

void write_json_file(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  auto in = open_in(path);
  json j;
  in >> j;
  return j;
}

}  // namespace sparseloc
