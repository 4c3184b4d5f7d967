#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "sparseloc/metrics.hpp"

using namespace sparseloc;

TEST_CASE("pose_error basics") {
  const Pose id = Pose::Identity();
  auto e = pose_error(id, id);
  CHECK(e.translation_error == doctest::Approx(0.0));
  CHECK(e.rotation_error == doctest::Approx(0.0));

  Pose est = pose_from_xyyaw(3.0, 4.0, 0.0);
  e = pose_error(est, id);
  CHECK(e.translation_error == doctest::Approx(5.0));
  CHECK(e.rotation_error == doctest::Approx(0.0));

  est = pose_from_xyyaw(0.0, 0.0, 10.0 * M_PI / 180.0);
  e = pose_error(est, id);
  CHECK(e.rotation_error == doctest::Approx(10.0).epsilon(1e-9));

  // geodesic angle is symmetric and insensitive to which pose is "truth"
  const Pose a = pose_from_xyyaw(1.0, 2.0, 0.3);
  const Pose b = pose_from_xyyaw(-1.0, 0.5, -0.7);
  CHECK(pose_error(a, b).rotation_error ==
        doctest::Approx(pose_error(b, a).rotation_error));
  CHECK(pose_error(a, b).rotation_error == doctest::Approx(1.0 * 180.0 / M_PI));
}

TEST_CASE("rotation error covers composed axes") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Pose a, b;
    a.rotation = rotation_from_euler({u(rng), 0.5 * u(rng), 3.0 * u(rng)});
    b.rotation = rotation_from_euler({u(rng), 0.5 * u(rng), 3.0 * u(rng)});
    const double deg = pose_error(a, b).rotation_error;
    CHECK(deg >= 0.0);
    CHECK(deg <= 180.0 + 1e-9);
    // consistency with the quaternion geodesic
    const Eigen::Quaterniond qa(a.rotation), qb(b.rotation);
    const double ref = qa.angularDistance(qb) * 180.0 / M_PI;
    CHECK(deg == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("run_metrics means and success rates") {
  std::vector<Pose> truth{Pose::Identity(), Pose::Identity(), Pose::Identity(),
                          Pose::Identity()};
  std::vector<Pose> est{
      pose_from_xyyaw(1.0, 0.0, 0.0),                  // 1 m, 0 deg
      pose_from_xyyaw(3.0, 0.0, 0.0),                  // 3 m, 0 deg
      pose_from_xyyaw(0.0, 5.0, 2.0 * M_PI / 180.0),   // 5 m, 2 deg
      pose_from_xyyaw(0.0, 11.0, 6.0 * M_PI / 180.0),  // 11 m, 6 deg
  };
  const auto m = run_metrics(est, truth, default_thresholds());
  CHECK(m.frames_evaluated == 4);
  CHECK(m.ate == doctest::Approx(5.0));
  CHECK(m.are == doctest::Approx(2.0));
  // (4 m, 3 deg): frames 0,1 pass -> 50 %; (10 m, 5 deg): frames 0,1,2 -> 75 %
  REQUIRE(m.success_rate.size() == 2);
  CHECK(m.success_rate[0] == doctest::Approx(50.0));
  CHECK(m.success_rate[1] == doctest::Approx(75.0));

  SUBCASE("size mismatch and empty input throw") {
    CHECK_THROWS_AS(run_metrics(est, {truth[0]}, default_thresholds()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_metrics({}, {}, default_thresholds()), std::invalid_argument);
  }
  SUBCASE("threshold comparison is strict") {
    std::vector<Pose> edge{pose_from_xyyaw(4.0, 0.0, 0.0)};
    const auto me = run_metrics(edge, {Pose::Identity()}, {{4.0, 3.0}});
    CHECK(me.success_rate[0] == doctest::Approx(0.0));
  }
}

TEST_CASE("map_stats and ablation_improvement") {
  SparseMap map;
  map.instances.resize(5);
  const auto s = map_stats(map, 5000);
  CHECK(s.instance_count == 5);
  CHECK(s.sparsity_ratio == doctest::Approx(1000.0));

  CHECK(ablation_improvement(2.0, 1.0) == doctest::Approx(50.0));
  CHECK(ablation_improvement(2.0, 2.0) == doctest::Approx(0.0));
  CHECK(ablation_improvement(1.0, 2.0) == doctest::Approx(-100.0));
  CHECK_THROWS_AS(ablation_improvement(0.0, 1.0), std::invalid_argument);
}
