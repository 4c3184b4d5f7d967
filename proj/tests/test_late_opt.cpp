#include <doctest.h>

#include <random>

#include "sparseloc/late_opt.hpp"
#include "sparseloc/world_sim.hpp"

using namespace sparseloc;

namespace {

Pose random_transform(std::mt19937_64& rng, double trans_scale, double yaw_scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Pose t = pose_from_xyyaw(trans_scale * u(rng), trans_scale * u(rng),
                           yaw_scale * u(rng));
  t.translation.z() = 0.2 * u(rng);
  return t;
}

CorrespondenceSet make_pairs(const Pose& transform, size_t n, uint64_t seed,
                             double noise_sigma = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CorrespondenceSet pairs;
  for (size_t i = 0; i < n; ++i) {
    Correspondence c;
    c.source = Eigen::Vector3d(u(rng), u(rng), u(rng) / 10.0);
    c.target = transform_point(transform, c.source);
    if (noise_sigma > 0.0)
      c.target += noise_sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    pairs.push_back(c);
  }
  return pairs;
}

}  // namespace

TEST_CASE("history buffer evicts oldest beyond capacity") {
  HistoryBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    std::vector<Detection> dets(static_cast<size_t>(i + 1));
    buf.push(dets, pose_from_xyyaw(i, 0, 0));
  }
  REQUIRE(buf.size() == 3);
  CHECK(buf.entry(0).detections.size() == 3);  // frames 0 and 1 dropped
  CHECK(buf.entry(2).detections.size() == 5);
  CHECK(buf.entry(0).odometry_step.translation.x() == doctest::Approx(2.0));
}

TEST_CASE("chain_relative composes the step chain after the index") {
  HistoryBuffer buf(10);
  const Pose s1 = pose_from_xyyaw(1.0, 0.0, 0.1);
  const Pose s2 = pose_from_xyyaw(0.5, 0.2, -0.05);
  const Pose s3 = pose_from_xyyaw(2.0, -1.0, 0.3);
  buf.push({}, pose_from_xyyaw(9, 9, 9));  // step into the oldest frame, unused
  buf.push({}, s1);
  buf.push({}, s2);
  buf.push({}, s3);

  const Pose want = compose(compose(s1, s2), s3);
  const Pose got = chain_relative(buf, 0);
  CHECK((got.translation - want.translation).norm() < 1e-12);
  CHECK((got.rotation - want.rotation).norm() < 1e-12);

  const Pose last = chain_relative(buf, 3);
  CHECK((last.translation).norm() < 1e-12);
  CHECK((last.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK_THROWS_AS(chain_relative(buf, 4), std::out_of_range);
}

TEST_CASE("solve_alignment recovers an exact rigid transform") {
  std::mt19937_64 rng(31);
  RefineConfig cfg;
  for (int trial = 0; trial < 25; ++trial) {
    const Pose truth = random_transform(rng, 3.0, 0.5);
    const auto pairs = make_pairs(truth, 40, 100 + static_cast<uint64_t>(trial));
    const Pose est = solve_alignment(pairs, cfg);
    CHECK((est.translation - truth.translation).norm() < 1e-9);
    CHECK((est.rotation - truth.rotation).norm() < 1e-9);
  }
}

TEST_CASE("solve_alignment survives 30 percent outliers") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  RefineConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose truth = random_transform(rng, 3.0, 0.5);
    auto pairs = make_pairs(truth, 70, 200 + static_cast<uint64_t>(trial));
    for (size_t i = 0; i < 30; ++i)
      pairs[i * 2].target = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const Pose est = solve_alignment(pairs, cfg);
    CHECK((est.translation - truth.translation).norm() < 1e-3);
    CHECK((est.rotation - truth.rotation).norm() < 1e-3);
  }
}

TEST_CASE("huber and plain solvers agree on mildly noisy data") {
  std::mt19937_64 rng(41);
  RefineConfig kabsch;
  RefineConfig huber;
  huber.solver = RefineSolver::kHuberIrls;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose truth = random_transform(rng, 3.0, 0.5);
    const auto pairs = make_pairs(truth, 100, 300 + static_cast<uint64_t>(trial), 0.05);
    const Pose a = solve_alignment(pairs, kabsch);
    const Pose b = solve_alignment(pairs, huber);
    CHECK((a.translation - b.translation).norm() < 1e-3);
    const double tr = (a.rotation.transpose() * b.rotation).trace();
    const double deg = std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0)) * 180.0 / M_PI;
    CHECK(deg < 0.1);
    CHECK((a.translation - truth.translation).norm() < 0.1);
  }
}

TEST_CASE("solve_alignment failure modes") {
  RefineConfig cfg;
  SUBCASE("too few pairs") {
    const auto pairs = make_pairs(Pose::Identity(), 3, 1);
    CHECK_THROWS_AS(solve_alignment(pairs, cfg), std::invalid_argument);
  }
  SUBCASE("collinear geometry never reaches consensus") {
    CorrespondenceSet pairs;
    for (int i = 0; i < 20; ++i) {
      Correspondence c;
      c.source = Eigen::Vector3d(i, 0, 0);
      c.target = Eigen::Vector3d(i + 1.0, 0, 0);
      pairs.push_back(c);
    }
    CHECK_THROWS(solve_alignment(pairs, cfg));
  }
}

TEST_CASE("gather_correspondences maps detections through the odometry chain") {
  const LabelSet labels = make_label_set({"a", "b", "c", "d", "e", "f"}, 32, 7);
  SparseMap map;
  map.label_set = labels;
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  std::normal_distribution<double> gauss(0.0, 0.05);
  for (int i = 0; i < 24; ++i) {
    MapInstance inst;
    inst.centroid = Eigen::Vector3d(u(rng), u(rng), 1.0);
    // per-landmark feature identity: prototype plus a small fixed perturbation
    Eigen::VectorXd f = labels.prototypes[static_cast<size_t>(i % 6)];
    for (int d = 0; d < f.size(); ++d) f(d) += gauss(rng);
    inst.feature = f.normalized();
    inst.label = labels.labels[static_cast<size_t>(i % 6)];
    map.instances.push_back(std::move(inst));
  }

  // Walk 5 noiseless frames; detections are exact map points in local frames.
  std::vector<Pose> gt;
  for (int t = 0; t < 5; ++t) gt.push_back(pose_from_xyyaw(10.0 + 2.0 * t, 20.0, 0.1 * t));
  HistoryBuffer buf(10);
  for (int t = 0; t < 5; ++t) {
    std::vector<Detection> dets;
    const Pose inv = inverse(gt[static_cast<size_t>(t)]);
    for (const auto& inst : map.instances) {
      const Eigen::Vector3d local = transform_point(inv, inst.centroid);
      if (local.norm() > 40.0) continue;
      Detection d;
      d.centroid_local = local;
      d.feature = inst.feature;
      d.label = inst.label;
      d.confidence = 1.0;
      dets.push_back(std::move(d));
    }
    const Pose step = t == 0 ? Pose::Identity()
                             : compose(inverse(gt[static_cast<size_t>(t - 1)]),
                                       gt[static_cast<size_t>(t)]);
    buf.push(dets, step);
  }

  RefineConfig cfg;
  cfg.max_pair_distance = 1.0;
  const auto pairs = gather_correspondences(buf, gt.back(), map, cfg);
  CHECK(pairs.size() >= 10);
  // every pair must satisfy target == anchor * source exactly (noiseless)
  for (const auto& c : pairs)
    CHECK((transform_point(gt.back(), c.source) - c.target).norm() < 1e-9);

  SUBCASE("alignment on these pairs reproduces the anchor") {
    const Pose est = solve_alignment(pairs, cfg);
    CHECK((est.translation - gt.back().translation).norm() < 1e-9);
    CHECK((est.rotation - gt.back().rotation).norm() < 1e-9);
  }
  SUBCASE("refine corrects a drifted anchor") {
    RefineConfig loose = cfg;
    loose.max_pair_distance = 5.0;
    const Pose drifted = compose(gt.back(), pose_from_xyyaw(0.8, -0.6, 0.03));
    const Pose fixed = refine(buf, drifted, map, loose);
    CHECK((fixed.translation - gt.back().translation).norm() < 1e-6);
  }
  SUBCASE("empty history falls back to the anchor") {
    HistoryBuffer empty(5);
    const Pose anchor = pose_from_xyyaw(1, 2, 3);
    const Pose out = refine(empty, anchor, map, cfg);
    CHECK((out.translation - anchor.translation).norm() == 0.0);
    CHECK_THROWS_AS(gather_correspondences(empty, anchor, map, cfg),
                    std::invalid_argument);
  }
}
