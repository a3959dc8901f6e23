#include <benchmark/benchmark.h>

#include "linbai/arm_sets.hpp"
#include "linbai/bandit_env.hpp"
#include "linbai/designs.hpp"
#include "linbai/rng.hpp"

using namespace linbai;

namespace {

void BM_WidthBall(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto set = ArmSet::ball(d);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) /
                            static_cast<double>(d);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_width(set, a, 10000, 1).mean);
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_WidthBall)->Arg(4)->Arg(16)->Arg(64);

void BM_WidthCube(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto set = ArmSet::cube_pm(d);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_width(set, a, 10000, 1).mean);
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_WidthCube)->Arg(8)->Arg(64);

void BM_Pull(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Environment env(Eigen::VectorXd::Ones(d), 3);
  const Arm x = Eigen::VectorXd::Unit(d, 0);
  for (auto _ : state) benchmark::DoNotOptimize(env.pull(x));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Pull)->Arg(4)->Arg(64);

void BM_GOptimal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(9);
  std::vector<Arm> arms;
  for (std::size_t i = 0; i < n; ++i) {
    Arm x(8);
    for (auto& v : x) v = rng.gaussian();
    arms.push_back(x);
  }
  const auto set = ArmSet::finite(arms);
  for (auto _ : state) benchmark::DoNotOptimize(g_optimal(set).objective);
}
BENCHMARK(BM_GOptimal)->Arg(50)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
