#pragma once

// Hot loops of the model, in two flavours with identical arithmetic:
//
//   smq::kernels::serial  - single-threaded reference implementation
//   smq::kernels::omp     - OpenMP-parallel over independent outputs
//
// The parallel variants split work only across outputs that are computed
// independently, and every output is accumulated in the same order as in the
// serial variant, so both produce bitwise-identical results. The unqualified
// functions in smq::kernels dispatch to one or the other according to
// set_parallel().

#include <cstddef>
#include <cstdint>
#include <span>

namespace smq::kernels {

struct Conv1dDims {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t length = 1;
  std::size_t kernel = 3;
  std::size_t dilation = 1;
};

#define SMQ_KERNEL_DECLS                                                                    \
  /* output[b,o,t] = bias[o] + sum_{i,j} weight[o,i,j] * input[b,i,t + (j-half)*dilation] */ \
  template <typename T>                                                                     \
  void conv1d_forward(const Conv1dDims& d, std::span<const T> input,                        \
                      std::span<const T> weight, std::span<const T> bias,                   \
                      std::span<T> output);                                                 \
  /* grad_input += W^T * grad_output  (accumulates) */                                       \
  template <typename T>                                                                     \
  void conv1d_backward_input(const Conv1dDims& d, std::span<const T> grad_output,           \
                             std::span<const T> weight, std::span<T> grad_input);           \
  /* grad_weight, grad_bias += ...  (accumulates) */                                         \
  template <typename T>                                                                     \
  void conv1d_backward_params(const Conv1dDims& d, std::span<const T> grad_output,          \
                              std::span<const T> input, std::span<T> grad_weight,           \
                              std::span<T> grad_bias);                                      \
  /* For each row of `points` (n x dim), the index of the nearest row of `centers` */       \
  /* (k x dim) under squared Euclidean distance; ties go to the lowest index. */            \
  template <typename T>                                                                     \
  void nearest_rows(std::span<const T> points, std::span<const T> centers, std::size_t dim, \
                    std::span<std::uint32_t> index, std::span<T> sq_distance);              \
  /* Per-point silhouette values; singleton clusters and a == b == 0 give 0. */             \
  template <typename T>                                                                     \
  void silhouette_samples(std::span<const T> points, std::size_t dim,                       \
                          std::span<const std::uint32_t> labels, std::size_t clusters,      \
                          std::span<double> out);

namespace serial {
SMQ_KERNEL_DECLS
}  // namespace serial

namespace omp {
SMQ_KERNEL_DECLS
}  // namespace omp

SMQ_KERNEL_DECLS

#undef SMQ_KERNEL_DECLS

/// Selects the OpenMP variants (default) or the serial reference.
void set_parallel(bool enabled);
bool parallel_enabled();
/// Number of threads the OpenMP variants will use (1 without OpenMP).
int max_threads();

}  // namespace smq::kernels
