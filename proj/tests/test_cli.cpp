#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sparseloc/config.hpp"
#include "sparseloc/io.hpp"
#include "sparseloc/pipeline.hpp"

using namespace sparseloc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sparseloc_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

size_t line_count(const std::string& path) {
  std::ifstream in(path);
  size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

RunResult run_cli(const TempDir& td, const std::string& args) {
  static int counter = 0;
  const std::string so = td.file(".out" + std::to_string(counter));
  const std::string se = td.file(".err" + std::to_string(counter));
  ++counter;
  const char* bin = std::getenv("SPARSELOC_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "SPARSELOC_BIN must point at the sparseloc binary");
  const std::string cmd = std::string(bin) + " " + args + " >" + so + " 2>" + se;
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WEXITSTATUS(rc);
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

// Small town: fast enough that every subcommand runs in well under a second.
ExperimentConfig small_config(uint64_t seed, bool noiseless) {
  ExperimentConfig c;
  c.seed = seed;
  c.labels = {"tree", "bench", "street lamp", "traffic sign", "hydrant", "statue"};
  c.world.extent_x = 150.0;
  c.world.extent_y = 150.0;
  c.world.landmark_count = 60;
  c.world.min_separation = 4.0;
  c.mapping.delta_sim = 1.2;
  c.trajectory.waypoints = square_loop({10.0, 10.0}, 130.0);
  c.trajectory.closed = true;
  c.trajectory.step_length = 2.6;
  c.sensor.max_range = 60.0;
  if (noiseless) {
    c.sensor.detect_prob = 1.0;
    c.sensor.centroid_sigma = 0.0;
    c.sensor.feature_noise_sigma = 0.0;
    c.odom_noise = {};
  } else {
    c.odom_noise.trans_sigma = 0.05;
    c.odom_noise.rot_sigma = 0.5 * M_PI / 180.0;
  }
  return c;
}

std::string write_config(const TempDir& td, const ExperimentConfig& cfg,
                         const std::string& name = "config.json") {
  const std::string path = td.file(name);
  write_json_file(path, cfg.to_json());
  return path;
}

}  // namespace

TEST_CASE("simulate writes deterministic logs with one record per frame") {
  TempDir td;
  const ExperimentConfig cfg = small_config(3, false);
  const std::string cp = write_config(td, cfg);

  const auto r1 = run_cli(td, "simulate --config " + cp + " --out " + td.file("a.jsonl") +
                                  " --gt " + td.file("a_gt.jsonl") + " --quiet");
  REQUIRE(r1.code == 0);
  const auto r2 = run_cli(td, "simulate --config " + cp + " --out " + td.file("b.jsonl") +
                                  " --gt " + td.file("b_gt.jsonl") + " --quiet");
  REQUIRE(r2.code == 0);

  CHECK(slurp(td.file("a.jsonl")) == slurp(td.file("b.jsonl")));
  CHECK(slurp(td.file("a_gt.jsonl")) == slurp(td.file("b_gt.jsonl")));

  // meta line + one record per trajectory frame
  const size_t frames = generate_trajectory(cfg.trajectory).size();
  CHECK(line_count(td.file("a.jsonl")) == frames + 1);
  CHECK(line_count(td.file("a_gt.jsonl")) == frames + 1);

  SUBCASE("--seed overrides the config seed and lands in the artifact") {
    const auto r = run_cli(td, "simulate --config " + cp + " --seed 7 --out " +
                                   td.file("c.jsonl") + " --quiet");
    REQUIRE(r.code == 0);
    CHECK(slurp(td.file("c.jsonl")) != slurp(td.file("a.jsonl")));
    const DetectionLog log = read_detection_log(td.file("c.jsonl"));
    CHECK(log.meta.at("seed").get<uint64_t>() == 7);
  }
}

TEST_CASE("missing config field exits 1 and names the field") {
  TempDir td;
  json j = small_config(1, false).to_json();
  j.erase("seed");
  write_json_file(td.file("broken.json"), j);

  const auto r = run_cli(td, "simulate --config " + td.file("broken.json") + " --out " +
                                 td.file("x.jsonl"));
  CHECK(r.code == 1);
  CHECK(r.err.find("seed") != std::string::npos);
}

TEST_CASE("build-map recovers the landmark count from a clean log") {
  TempDir td;
  const ExperimentConfig cfg = small_config(11, true);
  const std::string cp = write_config(td, cfg);
  REQUIRE(run_cli(td, "simulate --config " + cp + " --out " + td.file("log.jsonl") +
                          " --gt " + td.file("gt.jsonl") + " --quiet")
              .code == 0);

  const auto r = run_cli(td, "build-map --detections " + td.file("log.jsonl") +
                                 " --poses " + td.file("gt.jsonl") + " --config " + cp +
                                 " --out " + td.file("map.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("K = 60") != std::string::npos);
  CHECK(load_map(td.file("map.json")).size() == 60);

  SUBCASE("rerun produces identical bytes") {
    REQUIRE(run_cli(td, "build-map --detections " + td.file("log.jsonl") + " --poses " +
                            td.file("gt.jsonl") + " --config " + cp + " --out " +
                            td.file("map2.json") + " --quiet")
                .code == 0);
    CHECK(slurp(td.file("map.json")) == slurp(td.file("map2.json")));
  }
  SUBCASE("poses default to the gt_pose records embedded in the log") {
    REQUIRE(run_cli(td, "build-map --detections " + td.file("log.jsonl") + " --config " +
                            cp + " --out " + td.file("map3.json") + " --quiet")
                .code == 0);
    CHECK(slurp(td.file("map.json")) == slurp(td.file("map3.json")));
  }
  SUBCASE("frame/pose count mismatch is a runtime failure") {
    std::vector<Pose> short_gt = read_ground_truth(td.file("gt.jsonl"));
    short_gt.pop_back();
    write_ground_truth(td.file("short_gt.jsonl"), short_gt, json::object());
    const auto bad = run_cli(td, "build-map --detections " + td.file("log.jsonl") +
                                     " --poses " + td.file("short_gt.jsonl") +
                                     " --config " + cp + " --out " + td.file("m.json"));
    CHECK(bad.code == 2);
    CHECK(bad.err.find("mismatch") != std::string::npos);
  }
}

TEST_CASE("localize emits a full deterministic trace") {
  TempDir td;
  const ExperimentConfig cfg = small_config(5, false);
  const std::string cp = write_config(td, cfg);
  REQUIRE(run_cli(td, "simulate --config " + cp + " --out " + td.file("log.jsonl") +
                          " --gt " + td.file("gt.jsonl") + " --quiet")
              .code == 0);
  REQUIRE(run_cli(td, "build-map --detections " + td.file("log.jsonl") + " --config " +
                          cp + " --out " + td.file("map.json") + " --quiet")
              .code == 0);

  const auto r = run_cli(td, "localize --map " + td.file("map.json") + " --detections " +
                                 td.file("log.jsonl") + " --config " + cp + " --out " +
                                 td.file("trace.jsonl") + " --threads 2 --quiet");
  REQUIRE(r.code == 0);
  const auto trace = read_trace(td.file("trace.jsonl"));
  CHECK(trace.size() == read_detection_log(td.file("log.jsonl")).frames.size());

  SUBCASE("thread count does not change the bytes") {
    REQUIRE(run_cli(td, "localize --map " + td.file("map.json") + " --detections " +
                            td.file("log.jsonl") + " --config " + cp + " --out " +
                            td.file("trace4.jsonl") + " --threads 4 --quiet")
                .code == 0);
    CHECK(slurp(td.file("trace.jsonl")) == slurp(td.file("trace4.jsonl")));
  }
  SUBCASE("empty map is a runtime failure") {
    save_map(td.file("empty_map.json"), SparseMap{}, json::object());
    const auto bad = run_cli(td, "localize --map " + td.file("empty_map.json") +
                                     " --detections " + td.file("log.jsonl") +
                                     " --config " + cp + " --out " + td.file("t.jsonl"));
    CHECK(bad.code == 2);
  }
}

TEST_CASE("evaluate scores a perfect trace at SR 100") {
  TempDir td;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Pose> gt;
  std::vector<TraceRecord> trace;
  for (int i = 0; i < 40; ++i) {
    Pose p = pose_from_xyyaw(u(rng), u(rng), 0.05 * u(rng));
    gt.push_back(p);
    TraceRecord rec;
    rec.frame = i;
    rec.coarse = p;
    rec.converged = true;
    trace.push_back(rec);
  }
  write_ground_truth(td.file("gt.jsonl"), gt, json::object());
  write_trace(td.file("trace.jsonl"), trace, json::object());

  const auto r = run_cli(td, "evaluate --trace " + td.file("trace.jsonl") + " --gt " +
                                 td.file("gt.jsonl") + " --out " + td.file("report.json") +
                                 " --quiet");
  REQUIRE(r.code == 0);
  const json report = read_json_file(td.file("report.json"));
  CHECK(report.at("coarse").at("ate_m").get<double>() == doctest::Approx(0.0));
  REQUIRE(report.at("coarse").at("thresholds").size() == 2);  // (4 m, 3°), (10 m, 5°)
  CHECK(report.at("coarse").at("thresholds")[0].at("success_rate_pct").get<double>() ==
        doctest::Approx(100.0));
  CHECK(report.at("coarse").at("thresholds")[1].at("success_rate_pct").get<double>() ==
        doctest::Approx(100.0));

  SUBCASE("custom threshold list replaces the defaults") {
    const auto rc = run_cli(td, "evaluate --trace " + td.file("trace.jsonl") + " --gt " +
                                    td.file("gt.jsonl") + " --threshold 1,1 --out " +
                                    td.file("r1.json") + " --quiet");
    REQUIRE(rc.code == 0);
    CHECK(read_json_file(td.file("r1.json")).at("coarse").at("thresholds").size() == 1);
  }
  SUBCASE("malformed threshold is a usage error") {
    CHECK(run_cli(td, "evaluate --trace " + td.file("trace.jsonl") + " --gt " +
                          td.file("gt.jsonl") + " --threshold nope")
              .code == 1);
  }
  SUBCASE("frame count mismatch fails") {
    write_ground_truth(td.file("short.jsonl"), {gt.begin(), gt.begin() + 5},
                       json::object());
    CHECK(run_cli(td, "evaluate --trace " + td.file("trace.jsonl") + " --gt " +
                          td.file("short.jsonl"))
              .code != 0);
  }
}

TEST_CASE("bench sweeps seeds into a CSV") {
  TempDir td;
  ExperimentConfig cfg = small_config(1, false);
  const std::string cp = write_config(td, cfg);
  const auto r = run_cli(td, "bench --config " + cp + " --seeds 2 --first-seed 3 --out " +
                                 td.file("bench.csv") + " --threads 2 --quiet");
  REQUIRE(r.code == 0);
  CHECK(line_count(td.file("bench.csv")) == 3);  // header + 2 seeds
  const std::string csv = slurp(td.file("bench.csv"));
  CHECK(csv.find("seed,converged_frame") != std::string::npos);
  CHECK(csv.find("\n3,") != std::string::npos);
  CHECK(csv.find("\n4,") != std::string::npos);
}

TEST_CASE("usage errors exit 1, help exits 0") {
  TempDir td;
  CHECK(run_cli(td, "").code == 1);                       // subcommand required
  CHECK(run_cli(td, "frobnicate").code == 1);             // unknown subcommand
  CHECK(run_cli(td, "simulate --out x.jsonl").code == 1); // missing --config
  CHECK(run_cli(td, "--help").code == 0);
  CHECK(run_cli(td, "simulate --config nope.json --out " + td.file("x.jsonl")).code != 0);
}
