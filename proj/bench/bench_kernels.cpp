// Parallel kernels against their serial references.
//
//   bench_kernels --benchmark_filter=rbf
//
// The second argument of the parallel benchmarks is the thread count.

#include <benchmark/benchmark.h>

#include <vector>

#include "spdpool/kernels.hpp"
#include "spdpool/rng.hpp"

namespace {

using namespace spdpool;

RowMatrix random_rows(Eigen::Index d, Eigen::Index n) {
  Rng rng(1);
  RowMatrix t(d, n);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < n; ++j) t(i, j) = rng.uniform();
  return t;
}

std::vector<Eigen::MatrixXd> random_frames(int count, int h, int w) {
  Rng rng(2);
  std::vector<Eigen::MatrixXd> out;
  for (int k = 0; k < count; ++k) {
    Eigen::MatrixXd f(h, w);
    for (Eigen::Index j = 0; j < w; ++j)
      for (Eigen::Index i = 0; i < h; ++i) f(i, j) = 255.0 * rng.uniform();
    out.push_back(std::move(f));
  }
  return out;
}

void BM_rbf_reference(benchmark::State& state) {
  const auto t = random_rows(state.range(0), 40);
  for (auto _ : state) benchmark::DoNotOptimize(reference::row_rbf_sums(t, 1.0));
}

void BM_rbf_parallel(benchmark::State& state) {
  const auto t = random_rows(state.range(0), 40);
  set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::row_rbf_sums(t, 1.0));
}

void BM_inner_reference(benchmark::State& state) {
  const auto t = random_rows(state.range(0), 40);
  for (auto _ : state) benchmark::DoNotOptimize(reference::row_inner_products(t));
}

void BM_inner_parallel(benchmark::State& state) {
  const auto t = random_rows(state.range(0), 40);
  set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::row_inner_products(t));
}

// Pairwise function with enough work per entry to resemble a Gram entry.
double pair_cost(std::size_t i, std::size_t j) {
  double acc = 0.0;
  for (int k = 0; k < 200; ++k) acc += 1.0 / (1.0 + static_cast<double>(i * k + j));
  return acc;
}

void BM_gram_reference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference::symmetric_pairwise(n, pair_cost));
}

void BM_gram_parallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::symmetric_pairwise(n, pair_cost));
}

void BM_mad_reference(benchmark::State& state) {
  const auto frames = random_frames(15, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::mean_abs_diff(frames));
}

void BM_mad_parallel(benchmark::State& state) {
  const auto frames = random_frames(15, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mean_abs_diff(frames));
}

}  // namespace

BENCHMARK(BM_rbf_reference)->Arg(64)->Arg(256);
BENCHMARK(BM_rbf_parallel)->ArgsProduct({{64, 256}, {1, 2, 4}})->UseRealTime();
BENCHMARK(BM_inner_reference)->Arg(64)->Arg(256);
BENCHMARK(BM_inner_parallel)->ArgsProduct({{64, 256}, {1, 2, 4}})->UseRealTime();
BENCHMARK(BM_gram_reference)->Arg(200);
BENCHMARK(BM_gram_parallel)->ArgsProduct({{200}, {1, 2, 4}})->UseRealTime();
BENCHMARK(BM_mad_reference)->Arg(128);
BENCHMARK(BM_mad_parallel)->ArgsProduct({{128}, {1, 2, 4}})->UseRealTime();

BENCHMARK_MAIN();
