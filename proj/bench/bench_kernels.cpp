// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "smq/kernels.hpp"

namespace k = smq::kernels;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// One dilated layer of the default model on a batch of 8 sequences x 4 joints.
k::Conv1dDims layer_dims(const benchmark::State& state) {
  return {32, 64, 64, static_cast<std::size_t>(state.range(0)), 3, 2};
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const auto d = layer_dims(state);
  const auto in = random_vec(d.batch * d.in_channels * d.length, 1);
  const auto w = random_vec(d.out_channels * d.in_channels * d.kernel, 2);
  const auto b = random_vec(d.out_channels, 3);
  std::vector<float> out(d.batch * d.out_channels * d.length);
  for (auto _ : state) {
    if (Parallel) k::omp::conv1d_forward<float>(d, in, w, b, out);
    else k::serial::conv1d_forward<float>(d, in, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * d.batch * d.out_channels * d.in_channels * d.kernel * d.length);
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const auto d = layer_dims(state);
  const auto in = random_vec(d.batch * d.in_channels * d.length, 1);
  const auto w = random_vec(d.out_channels * d.in_channels * d.kernel, 2);
  const auto go = random_vec(d.batch * d.out_channels * d.length, 4);
  std::vector<float> gi(in.size()), gw(w.size()), gb(d.out_channels);
  for (auto _ : state) {
    if (Parallel) {
      k::omp::conv1d_backward_input<float>(d, go, w, gi);
      k::omp::conv1d_backward_params<float>(d, go, in, gw, gb);
    } else {
      k::serial::conv1d_backward_input<float>(d, go, w, gi);
      k::serial::conv1d_backward_params<float>(d, go, in, gw, gb);
    }
    benchmark::DoNotOptimize(gi.data());
    benchmark::DoNotOptimize(gw.data());
  }
  state.SetItemsProcessed(state.iterations() * 4 * d.batch * d.out_channels * d.in_channels * d.kernel * d.length);
}

// Nearest-word search over K words of one-second patches (P=50, W=64).
template <bool Parallel>
void BM_Nearest(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), words = 8, dim = 50 * 64;
  const auto pts = random_vec(n * dim, 5);
  const auto ctr = random_vec(words * dim, 6);
  std::vector<std::uint32_t> idx(n);
  std::vector<float> dist(n);
  for (auto _ : state) {
    if (Parallel) k::omp::nearest_rows<float>(pts, ctr, dim, idx, dist);
    else k::serial::nearest_rows<float>(pts, ctr, dim, idx, dist);
    benchmark::DoNotOptimize(idx.data());
  }
}

template <bool Parallel>
void BM_Silhouette(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), dim = 256, clusters = 4;
  const auto pts = random_vec(n * dim, 7);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint32_t>(i % clusters);
  std::vector<double> out(n);
  for (auto _ : state) {
    if (Parallel) k::omp::silhouette_samples<float>(pts, dim, labels, clusters, out);
    else k::serial::silhouette_samples<float>(pts, dim, labels, clusters, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/omp")->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/serial")->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/omp")->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Nearest<false>)->Name("nearest/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Nearest<true>)->Name("nearest/omp")->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Silhouette<false>)->Name("silhouette/serial")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Silhouette<true>)->Name("silhouette/omp")->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
