#include "kernel_inner.hpp"

namespace smq::kernels::serial {

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output) {
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t o = 0; o < d.out_channels; ++o) {
      inner::conv_forward_row(d, input.data(), weight.data(), bias.data(), output.data(), b, o);
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> grad_output,
                           std::span<const T> weight, std::span<T> grad_input) {
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t i = 0; i < d.in_channels; ++i) {
      inner::conv_backward_input_row(d, grad_output.data(), weight.data(), grad_input.data(), b, i);
    }
  }
}

template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> grad_output,
                            std::span<const T> input, std::span<T> grad_weight,
                            std::span<T> grad_bias) {
  for (std::size_t o = 0; o < d.out_channels; ++o) {
    for (std::size_t i = 0; i < d.in_channels; ++i) {
      inner::conv_backward_weight_cell(d, grad_output.data(), input.data(), grad_weight.data(), o, i);
    }
    inner::conv_backward_bias_cell(d, grad_output.data(), grad_bias.data(), o);
  }
}

template <typename T>
void nearest_rows(std::span<const T> points, std::span<const T> centers, std::size_t dim,
                  std::span<std::uint32_t> index, std::span<T> sq_distance) {
  const std::size_t n = index.size();
  const std::size_t k = centers.size() / dim;
  for (std::size_t p = 0; p < n; ++p) {
    inner::nearest_row(points.data(), centers.data(), k, dim, index.data(), sq_distance.data(), p);
  }
}

template <typename T>
void silhouette_samples(std::span<const T> points, std::size_t dim,
                        std::span<const std::uint32_t> labels, std::size_t clusters,
                        std::span<double> out) {
  const auto counts = inner::cluster_counts(labels, clusters);
  const std::size_t n = labels.size();
  for (std::size_t p = 0; p < n; ++p) {
    out[p] = inner::silhouette_point(points.data(), n, dim, labels.data(), counts, p);
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
#undef SMQ_INSTANTIATE

}  // namespace smq::kernels::serial
