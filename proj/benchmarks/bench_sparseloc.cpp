#include <benchmark/benchmark.h>

#include <random>

#include "sparseloc/pipeline.hpp"

using namespace sparseloc;

namespace {

// Shared fixture data: one mid-sized town scenario.
struct Scene {
  ExperimentConfig cfg;
  SimulationResult sim;
  SparseMap map;

  Scene() {
    cfg = presets::town_loop(7);
    cfg.world.landmark_count = 150;
    cfg.world.extent_x = cfg.world.extent_y = 300.0;
    cfg.trajectory.waypoints = square_loop({12.5, 12.5}, 275.0);
    cfg.world.corridor = cfg.trajectory.waypoints;
    sim = simulate(cfg);
    map = build_map_from_frames(sim.frames, sim.label_set, cfg.mapping);
  }
};

const Scene& scene() {
  static Scene s;
  return s;
}

void bm_update_weights(benchmark::State& state) {
  const Scene& s = scene();
  LocalizationConfig lc = s.cfg.localization;
  lc.particle_count = static_cast<int>(state.range(0));
  lc.threads = static_cast<int>(state.range(1));
  auto particles = init_particles(s.map, lc, 42);
  const auto& detections = s.sim.frames[s.sim.frames.size() / 2].detections;
  for (auto _ : state) {
    update_weights(particles, detections, s.map, lc);
    benchmark::DoNotOptimize(particles.data());
  }
  state.SetItemsProcessed(state.iterations() * lc.particle_count);
}
BENCHMARK(bm_update_weights)
    ->ArgsProduct({{250, 1000, 4000}, {1, 4, 8}})
    ->Unit(benchmark::kMillisecond);

CorrespondenceSet make_pairs(int n, double outlier_fraction, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Pose t;
  t.rotation = rotation_from_euler({0.3, -0.2, 1.1});
  t.translation = Eigen::Vector3d(4.0, -2.0, 1.0);
  CorrespondenceSet pairs;
  for (int i = 0; i < n; ++i) {
    Correspondence c;
    c.source = Eigen::Vector3d(u(rng), u(rng), u(rng));
    c.target = transform_point(t, c.source);
    if (u01(rng) < outlier_fraction)
      c.target += Eigen::Vector3d(u(rng), u(rng), u(rng));
    pairs.push_back(c);
  }
  return pairs;
}

void bm_solve_alignment(benchmark::State& state) {
  const auto pairs = make_pairs(static_cast<int>(state.range(0)),
                                state.range(1) ? 0.3 : 0.0, 99);
  RefineConfig cfg;
  cfg.solver = state.range(2) ? RefineSolver::kHuberIrls
                              : RefineSolver::kProcrustesRansac;
  for (auto _ : state) {
    Pose p = solve_alignment(pairs, cfg);
    benchmark::DoNotOptimize(p.translation.data());
  }
}
BENCHMARK(bm_solve_alignment)
    ->ArgsProduct({{20, 100, 500}, {0, 1}, {0, 1}})
    ->Unit(benchmark::kMicrosecond);

void bm_refine_cluster(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> core(0.0, 0.2);
  std::uniform_real_distribution<double> spread(-30.0, 30.0);
  std::vector<Eigen::Vector3d> points;
  const int n = static_cast<int>(state.range(0));
  for (int i = 0; i < n; ++i) {
    if (i % 5 == 0)  // 20% scattered noise
      points.emplace_back(spread(rng), spread(rng), spread(rng));
    else
      points.emplace_back(core(rng), core(rng), core(rng));
  }
  for (auto _ : state) {
    auto r = refine_cluster(points, 0.5, 3);
    benchmark::DoNotOptimize(r.centroid.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_refine_cluster)->Arg(50)->Arg(200)->Arg(1000)->Unit(benchmark::kMicrosecond);

void bm_build_map(benchmark::State& state) {
  const Scene& s = scene();
  for (auto _ : state) {
    SparseMap m = build_map_from_frames(s.sim.frames, s.sim.label_set, s.cfg.mapping);
    benchmark::DoNotOptimize(m.instances.data());
  }
}
BENCHMARK(bm_build_map)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
