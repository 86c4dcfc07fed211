#include <benchmark/benchmark.h>

#include "koopman_lift/learn.hpp"
#include "koopman_lift/lifting.hpp"
#include "koopman_lift/monte_carlo.hpp"
#include "koopman_lift/rng.hpp"

namespace {

using namespace klift;

Box unit_box(int m) { return {Vec::Constant(m, -1.0), Vec::Constant(m, 1.0)}; }

Mat random_states(Index rows, int m, std::uint64_t seed) {
  Rng rng(seed);
  Mat Y(rows, m);
  for (Index i = 0; i < Y.size(); ++i) Y.data()[i] = 2.0 * rng.uniform() - 1.0;
  return Y;
}

void BM_DictEval(benchmark::State& state, DictKind kind) {
  const int m = static_cast<int>(state.range(0));
  const int N = static_cast<int>(state.range(1));
  const Dictionary d = initial_dictionary(kind, m, N, unit_box(m), 1);
  const Vec y = random_states(1, m, 2).row(0).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(dict_eval(d, y));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_DictEval, augsill, DictKind::AugSILL)->Args({2, 20})->Args({7, 27})->Args({7, 100});
BENCHMARK_CAPTURE(BM_DictEval, rbf, DictKind::SummedRBF)->Args({2, 20})->Args({7, 100});
BENCHMARK_CAPTURE(BM_DictEval, legendre, DictKind::Legendre)->Args({2, 20})->Args({7, 100});

void BM_DictEvalRows(benchmark::State& state) {
  const Index rows = state.range(0);
  const Dictionary d = initial_dictionary(DictKind::AugSILL, 2, 20, unit_box(2), 1);
  const Mat Y = random_states(rows, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(dict_eval_rows(d, Y));
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_DictEvalRows)->Range(64, 4096);

void BM_TermGradients(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Dictionary d = initial_dictionary(DictKind::AugSILL, m, 27, unit_box(m), 1);
  const Vec y = random_states(1, m, 4).row(0).transpose();
  Vec psi;
  Mat grads;
  for (auto _ : state) {
    lift_with_term_gradients(d, y, psi, grads);
    benchmark::DoNotOptimize(grads.data());
  }
}
BENCHMARK(BM_TermGradients)->Arg(2)->Arg(7);

void BM_McExpectation(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_expectation(McFunction::ConjLogistic, 5.0, 3, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McExpectation)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
