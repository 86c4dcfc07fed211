#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "koopman_lift/evaluate.hpp"
#include "koopman_lift/learn.hpp"
#include "koopman_lift/simulate.hpp"
#include "koopman_lift/systems.hpp"

namespace {

using namespace klift;

const Dataset& planar_data() {
  static const Dataset data = [] {
    SimulationConfig cfg;
    cfg.steps = 50;
    cfg.train_trajectories = 20;
    cfg.test_trajectories = 4;
    cfg.seed = 11;
    return make_dataset(make_system("vanderpol"), cfg);
  }();
  return data;
}

void BM_Simulate(benchmark::State& state) {
  const SystemDef s = make_system(state.range(0) == 0 ? "vanderpol" : "glycolysis");
  const Vec x0 = s.default_init_box.lo + 0.5 * (s.default_init_box.hi - s.default_init_box.lo);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(s, x0, 0.02, 100, 10));
}
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1);

void BM_BatchGradient(benchmark::State& state) {
  const SnapshotSet& snaps = planar_data().snapshots;
  const int N = static_cast<int>(state.range(0));
  const Dictionary d = initial_dictionary(DictKind::AugSILL, 2, N, data_range(snaps), 1);
  const Mat K = Mat::Identity(d.size(), d.size());
  std::vector<Index> rows(32);
  std::iota(rows.begin(), rows.end(), Index{0});
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss_and_gradient(d, K, snaps.X, snaps.Xp, rows));
}
BENCHMARK(BM_BatchGradient)->Arg(10)->Arg(20)->Arg(50);

void BM_SgdEpochs(benchmark::State& state) {
  const Dataset& data = planar_data();
  const Dictionary d = initial_dictionary(DictKind::AugSILL, 2, 20, data_range(data.snapshots), 1);
  TrainConfig cfg;
  cfg.epochs = static_cast<int>(state.range(0));
  cfg.log_every = cfg.epochs;
  for (auto _ : state) benchmark::DoNotOptimize(sgd_train(d, data.snapshots, data.test, cfg));
}
BENCHMARK(BM_SgdEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MatchingPursuit(benchmark::State& state) {
  const Dataset& data = planar_data();
  PursuitConfig cfg;
  cfg.pool_size = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(matching_pursuit_fit(DictKind::AugSILL, cfg, data.snapshots, 10));
  }
}
BENCHMARK(BM_MatchingPursuit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_EdmdFit(benchmark::State& state) {
  const SnapshotSet& snaps = planar_data().snapshots;
  const Dictionary d = initial_dictionary(DictKind::Legendre, 2, static_cast<int>(state.range(0)), data_range(snaps), 1);
  for (auto _ : state) benchmark::DoNotOptimize(edmd_fit(d, snaps));
}
BENCHMARK(BM_EdmdFit)->Arg(20)->Arg(100);

void BM_FiveStepError(benchmark::State& state) {
  const Dataset& data = planar_data();
  const KoopmanModel model = edmd_fit(initial_dictionary(DictKind::AugSILL, 2, 20, data_range(data.snapshots), 1),
                                      data.snapshots);
  for (auto _ : state) benchmark::DoNotOptimize(five_step_error(model, data.test));
}
BENCHMARK(BM_FiveStepError);

}  // namespace

BENCHMARK_MAIN();
