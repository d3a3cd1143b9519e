#include "kernel_inner.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace smq::kernels {

namespace omp {

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output) {
  const auto rows = static_cast<std::ptrdiff_t>(d.batch * d.out_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    inner::conv_forward_row(d, input.data(), weight.data(), bias.data(), output.data(),
                            row / d.out_channels, row % d.out_channels);
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> grad_output,
                           std::span<const T> weight, std::span<T> grad_input) {
  const auto rows = static_cast<std::ptrdiff_t>(d.batch * d.in_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    inner::conv_backward_input_row(d, grad_output.data(), weight.data(), grad_input.data(),
                                   row / d.in_channels, row % d.in_channels);
  }
}

template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> grad_output,
                            std::span<const T> input, std::span<T> grad_weight,
                            std::span<T> grad_bias) {
  const auto cells = static_cast<std::ptrdiff_t>(d.out_channels * d.in_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < cells; ++c) {
    const auto cell = static_cast<std::size_t>(c);
    inner::conv_backward_weight_cell(d, grad_output.data(), input.data(), grad_weight.data(),
                                     cell / d.in_channels, cell % d.in_channels);
  }
  const auto outs = static_cast<std::ptrdiff_t>(d.out_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t o = 0; o < outs; ++o) {
    inner::conv_backward_bias_cell(d, grad_output.data(), grad_bias.data(),
                                   static_cast<std::size_t>(o));
  }
}

template <typename T>
void nearest_rows(std::span<const T> points, std::span<const T> centers, std::size_t dim,
                  std::span<std::uint32_t> index, std::span<T> sq_distance) {
  const auto n = static_cast<std::ptrdiff_t>(index.size());
  const std::size_t k = centers.size() / dim;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    inner::nearest_row(points.data(), centers.data(), k, dim, index.data(), sq_distance.data(),
                       static_cast<std::size_t>(p));
  }
}

template <typename T>
void silhouette_samples(std::span<const T> points, std::size_t dim,
                        std::span<const std::uint32_t> labels, std::size_t clusters,
                        std::span<double> out) {
  const auto counts = inner::cluster_counts(labels, clusters);
  const std::size_t n = labels.size();
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
    out[p] = inner::silhouette_point(points.data(), n, dim, labels.data(), counts,
                                     static_cast<std::size_t>(p));
  }
}

#define SMQ_INSTANTIATE(T)                                                                      \
  template void conv1d_forward<T>(const Conv1dDims&, std::span<const T>, std::span<const T>,    \
                                  std::span<const T>, std::span<T>);                            \
  template void conv1d_backward_input<T>(const Conv1dDims&, std::span<const T>,                 \
                                         std::span<const T>, std::span<T>);                     \
  template void conv1d_backward_params<T>(const Conv1dDims&, std::span<const T>,                \
                                          std::span<const T>, std::span<T>, std::span<T>);      \
  template void nearest_rows<T>(std::span<const T>, std::span<const T>, std::size_t,            \
                                std::span<std::uint32_t>, std::span<T>);                        \
  template void silhouette_samples<T>(std::span<const T>, std::size_t,                          \
                                      std::span<const std::uint32_t>, std::size_t,              \
                                      std::span<double>);
SMQ_INSTANTIATE(float)
SMQ_INSTANTIATE(double)

}  // namespace omp

namespace {
std::atomic<bool> use_parallel{true};
}  // namespace

void set_parallel(bool enabled) { use_parallel.store(enabled); }
bool parallel_enabled() { return use_parallel.load(); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output) {
  if (parallel_enabled()) omp::conv1d_forward(d, input, weight, bias, output);
  else serial::conv1d_forward(d, input, weight, bias, output);
}

template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> grad_output,
                           std::span<const T> weight, std::span<T> grad_input) {
  if (parallel_enabled()) omp::conv1d_backward_input(d, grad_output, weight, grad_input);
  else serial::conv1d_backward_input(d, grad_output, weight, grad_input);
}

template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> grad_output,
                            std::span<const T> input, std::span<T> grad_weight,
                            std::span<T> grad_bias) {
  if (parallel_enabled()) omp::conv1d_backward_params(d, grad_output, input, grad_weight, grad_bias);
  else serial::conv1d_backward_params(d, grad_output, input, grad_weight, grad_bias);
}

template <typename T>
void nearest_rows(std::span<const T> points, std::span<const T> centers, std::size_t dim,
                  std::span<std::uint32_t> index, std::span<T> sq_distance) {
  if (parallel_enabled()) omp::nearest_rows(points, centers, dim, index, sq_distance);
  else serial::nearest_rows(points, centers, dim, index, sq_distance);
}

template <typename T>
void silhouette_samples(std::span<const T> points, std::size_t dim,
                        std::span<const std::uint32_t> labels, std::size_t clusters,
                        std::span<double> out) {
  if (parallel_enabled()) omp::silhouette_samples(points, dim, labels, clusters, out);
  else serial::silhouette_samples(points, dim, labels, clusters, out);
}

SMQ_INSTANTIATE(float)
SMQ_INSTANTIATE(double)
#undef SMQ_INSTANTIATE

}  // namespace smq::kernels
