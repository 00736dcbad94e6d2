// Microbenchmarks for the blocked-array operators. Each iteration runs the
// full task graph to quiescence, so the numbers include scheduling overhead.

#include <benchmark/benchmark.h>

#include "distarray/dataset.hpp"
#include "distarray/dist_array.hpp"
#include "distarray/kmeans.hpp"

namespace {

da::BlockShape square_grid(std::size_t n, std::size_t blocks_per_side) {
  std::size_t side = (n + blocks_per_side - 1) / blocks_per_side;
  return {side, side};
}

void BM_ArrayTranspose(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  da::TaskRuntime rt;
  auto a = da::DistArray::random(rt, n, n, square_grid(n, 8), 1);
  rt.barrier();
  for (auto _ : state) {
    auto t = a.transpose();
    rt.barrier();
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * n));
}

void BM_ArrayShuffle(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  da::TaskRuntime rt;
  auto a = da::DistArray::random(rt, n, n, square_grid(n, 8), 1);
  rt.barrier();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto s = a.shuffle_rows(seed++);
    rt.barrier();
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * n));
}

void BM_Matmul(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  da::TaskRuntime rt;
  auto a = da::DistArray::random(rt, n, n, square_grid(n, 4), 1);
  auto b = da::DistArray::random(rt, n, n, square_grid(n, 4), 2);
  rt.barrier();
  for (auto _ : state) {
    auto c = da::matmul(a, b);
    rt.barrier();
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(2 * n * n * n));
}

void BM_DatasetTranspose(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  da::TaskRuntime rt;
  auto staged = da::DistArray::random(rt, n, 16, {n, 16}, 1);
  auto data = da::SubsetDataset::from_dense(rt, staged.collect(), n / 8);
  rt.barrier();
  for (auto _ : state) {
    auto t = data.transpose();
    rt.barrier();
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * 16));
}

void BM_DatasetShuffle(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  da::TaskRuntime rt;
  auto staged = da::DistArray::random(rt, n, 16, {n, 16}, 1);
  auto data = da::SubsetDataset::from_dense(rt, staged.collect(), n / 8);
  rt.barrier();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto s = data.shuffle(seed++);
    rt.barrier();
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * 16));
}

void BM_KMeansIteration(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  da::TaskRuntime rt;
  auto data = da::DistArray::random(rt, n, 16, {n / 8, 16}, 1);
  rt.barrier();
  da::KMeansParams params{.k = 8, .max_iter = 1, .tol = 0.0, .seed = 1};
  for (auto _ : state) {
    auto model = da::kmeans_fit(data, params);
    benchmark::DoNotOptimize(model);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}

} // namespace

BENCHMARK(BM_ArrayTranspose)->Arg(64)->Arg(256);
BENCHMARK(BM_ArrayShuffle)->Arg(64)->Arg(256);
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128);
BENCHMARK(BM_DatasetTranspose)->Arg(64)->Arg(256);
BENCHMARK(BM_DatasetShuffle)->Arg(64)->Arg(256);
BENCHMARK(BM_KMeansIteration)->Arg(512)->Arg(2048);

BENCHMARK_MAIN();
