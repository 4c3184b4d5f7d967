#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sparseloc/mapping.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

using json = nlohmann::json;

json pose_to_json(const Pose& p);
Pose pose_from_json(const json& j);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

json label_set_to_json(const LabelSet& set);
LabelSet label_set_from_json(const json& j);

/// One line of the localization trace.
struct TraceRecord {
  int frame = 0;
  Pose coarse;
  std::optional<Pose> refined;
  double dispersion = 0.0;
  double neff = 0.0;
  bool converged = false;
};

struct DetectionLog {
  json meta;  // seed, config_hash, feature_dim, ...
  LabelSet label_set;
  std::vector<DetectionFrame> frames;
};

/// Detection logs, ground truth, and traces are JSONL: a meta object on
/// the first line, one record per line after.
void write_detection_log(const std::string& path, const DetectionLog& log);
DetectionLog read_detection_log(const std::string& path);

void write_ground_truth(const std::string& path, const std::vector<Pose>& poses,
                        const json& meta);
std::vector<Pose> read_ground_truth(const std::string& path);

void write_trace(const std::string& path, const std::vector<TraceRecord>& trace,
                 const json& meta);
std::vector<TraceRecord> read_trace(const std::string& path);

/// Maps are single JSON documents; save -> load -> save is byte-identical.
void save_map(const std::string& path, const SparseMap& map, const json& metadata);
SparseMap load_map(const std::string& path, json* metadata = nullptr);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace sparseloc
