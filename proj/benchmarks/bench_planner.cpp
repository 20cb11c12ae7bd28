#include <benchmark/benchmark.h>

#include "lfgc/game.hpp"
#include "lfgc/planner.hpp"

using namespace lfgc;

namespace {

const RoadGeometry kRoad{};

TrafficSnapshot three_vehicles() {
  TrafficSnapshot t;
  t.ego = {0, 0, 20, 0};
  t.road = kRoad;
  for (int k = 0; k < 3; ++k) {
    t.interacting.push_back({k + 1, {-6.0 - 25.0 * k, 3.6, 20, 0}, {}, {}});
  }
  return t;
}

void BM_MergeSet(benchmark::State& state) {
  const PlannerConfig cfg;
  const auto gen = cfg.trajectory_config(kRoad);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_merge_set({0, 0, 20, 0}, std::nullopt, gen, VehicleParams{}));
  }
}
BENCHMARK(BM_MergeSet)->Unit(benchmark::kMicrosecond);

void BM_BuildPayoffs(benchmark::State& state) {
  const PlannerConfig cfg;
  const auto gen = cfg.trajectory_config(kRoad);
  const VehicleParams p;
  const auto ego = generate_merge_set({0, 0, 20, 0}, std::nullopt, gen, p).trajectories;
  const auto other = generate_longitudinal_set({-10, 3.6, 20, 0}, gen, p);
  const PairState pair{{0, 0, 20, 0}, {-10, 3.6, 20, 0}, p, p, &kRoad};
  for (auto _ : state) benchmark::DoNotOptimize(build_payoffs(pair, ego, other, cfg.game_spec()));
  state.counters["cells"] = static_cast<double>(ego.size() * other.size());
}
BENCHMARK(BM_BuildPayoffs)->Unit(benchmark::kMillisecond);

void BM_Plan(benchmark::State& state) {
  TrafficSnapshot t = three_vehicles();
  t.interacting.resize(static_cast<std::size_t>(state.range(0)));
  const PlannerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(plan(t, cfg));
}
BENCHMARK(BM_Plan)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
