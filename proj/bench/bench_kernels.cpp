// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "fogcache/fedcompress/quantize.hpp"
#include "fogcache/kernels.hpp"
#include "fogcache/rng.hpp"

namespace {

using fogcache::kernels::DenseShape;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  fogcache::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

template <auto Kernel>
void BM_DenseForward(benchmark::State& state) {
  const DenseShape s{static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  const std::size_t batch = 32;
  const auto w = noise(s.in_dim * s.out_dim, 1), b = noise(s.out_dim, 2), in = noise(batch * s.in_dim, 3);
  std::vector<double> out(batch * s.out_dim);
  for (auto _ : state) {
    Kernel(s, w, b, in, batch, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(batch * s.in_dim * s.out_dim));
}

template <auto Kernel>
void BM_DenseBackward(benchmark::State& state) {
  const DenseShape s{static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  const std::size_t batch = 32;
  const auto w = noise(s.in_dim * s.out_dim, 1), in = noise(batch * s.in_dim, 3), g = noise(batch * s.out_dim, 4);
  std::vector<double> gw(w.size()), gb(s.out_dim), gi(in.size());
  for (auto _ : state) {
    Kernel(s, w, in, g, batch, gw, gb, gi);
    benchmark::DoNotOptimize(gi.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(2 * batch * s.in_dim * s.out_dim));
}

template <auto Kernel>
void BM_AssignNearest(benchmark::State& state) {
  const auto points = noise(50000, 5);
  auto centroids = noise(static_cast<std::size_t>(state.range(0)), 6);
  std::sort(centroids.begin(), centroids.end());
  std::vector<std::uint32_t> idx(points.size());
  for (auto _ : state) {
    Kernel(points, centroids, idx);
    benchmark::DoNotOptimize(idx.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(points.size()));
}

template <auto Quantize>
void BM_Kmeans(benchmark::State& state) {
  const auto data = noise(20000, 7);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Quantize(data, k, {}));
}

namespace k = fogcache::kernels;
namespace fc = fogcache::fedcompress;

BENCHMARK(BM_DenseForward<k::serial::dense_forward>)->Name("dense_forward/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_DenseForward<k::parallel::dense_forward>)->Name("dense_forward/parallel")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_DenseBackward<k::serial::dense_backward>)->Name("dense_backward/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_DenseBackward<k::parallel::dense_backward>)->Name("dense_backward/parallel")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_AssignNearest<k::serial::assign_nearest>)->Name("assign_nearest/serial")->Arg(4)->Arg(32)->Arg(64);
BENCHMARK(BM_AssignNearest<k::parallel::assign_nearest>)->Name("assign_nearest/parallel")->Arg(4)->Arg(32)->Arg(64);
BENCHMARK(BM_Kmeans<fc::kmeans_quantize_reference>)->Name("kmeans/reference")->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Kmeans<fc::kmeans_quantize>)->Name("kmeans/sorted")->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
