#pragma once

// Per-output work items shared by the serial and OpenMP kernels. Each function
// computes one independent slice of the output, so the two variants differ only
// in how they schedule these calls.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "smq/kernels.hpp"

namespace smq::kernels::inner {

// Fixed 8-way split; the summation order is part of the determinism contract.
template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  T tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

template <typename T>
inline T sum(const T* a, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k];
  }
  T tail = 0;
  for (; i < n; ++i) tail += a[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
inline T squared_distance(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) {
      const T diff = a[i + k] - b[i + k];
      acc[k] += diff * diff;
    }
  }
  T tail = 0;
  for (; i < n; ++i) {
    const T diff = a[i] - b[i];
    tail += diff * diff;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

// Signed offset of tap j and the range of t for which t + offset is in [0, L).
struct TapRange {
  std::ptrdiff_t offset;
  std::size_t begin;
  std::size_t end;
};

inline TapRange tap_range(const Conv1dDims& d, std::size_t j) {
  const auto half = static_cast<std::ptrdiff_t>((d.kernel - 1) / 2);
  const auto offset = (static_cast<std::ptrdiff_t>(j) - half) * static_cast<std::ptrdiff_t>(d.dilation);
  const auto len = static_cast<std::ptrdiff_t>(d.length);
  const std::ptrdiff_t begin = std::max<std::ptrdiff_t>(0, -offset);
  const std::ptrdiff_t end = std::min<std::ptrdiff_t>(len, len - offset);
  if (begin >= end) return {offset, 0, 0};
  return {offset, static_cast<std::size_t>(begin), static_cast<std::size_t>(end)};
}

// One output row (b, o).
template <typename T>
void conv_forward_row(const Conv1dDims& d, const T* input, const T* weight, const T* bias,
                      T* output, std::size_t b, std::size_t o) {
  const std::size_t L = d.length;
  T* out = output + (b * d.out_channels + o) * L;
  std::fill(out, out + L, bias[o]);
  const T* w = weight + o * d.in_channels * d.kernel;
  for (std::size_t i = 0; i < d.in_channels; ++i) {
    const T* in = input + (b * d.in_channels + i) * L;
    for (std::size_t j = 0; j < d.kernel; ++j) {
      const T wij = w[i * d.kernel + j];
      const TapRange r = tap_range(d, j);
      if (r.begin < r.end) axpy(wij, in + r.begin + r.offset, out + r.begin, r.end - r.begin);
    }
  }
}

// One input-gradient row (b, i).
template <typename T>
void conv_backward_input_row(const Conv1dDims& d, const T* grad_output, const T* weight,
                             T* grad_input, std::size_t b, std::size_t i) {
  const std::size_t L = d.length;
  T* gin = grad_input + (b * d.in_channels + i) * L;
  for (std::size_t o = 0; o < d.out_channels; ++o) {
    const T* gout = grad_output + (b * d.out_channels + o) * L;
    const T* w = weight + (o * d.in_channels + i) * d.kernel;
    for (std::size_t j = 0; j < d.kernel; ++j) {
      const TapRange r = tap_range(d, j);
      // output t reads input t + offset
      if (r.begin < r.end) axpy(w[j], gout + r.begin, gin + r.begin + r.offset, r.end - r.begin);
    }
  }
}

// Weight gradient for the (o, i) kernel.
template <typename T>
void conv_backward_weight_cell(const Conv1dDims& d, const T* grad_output, const T* input,
                               T* grad_weight, std::size_t o, std::size_t i) {
  const std::size_t L = d.length;
  T* gw = grad_weight + (o * d.in_channels + i) * d.kernel;
  for (std::size_t j = 0; j < d.kernel; ++j) {
    const TapRange r = tap_range(d, j);
    if (r.begin >= r.end) continue;
    T acc = 0;
    for (std::size_t b = 0; b < d.batch; ++b) {
      const T* gout = grad_output + (b * d.out_channels + o) * L;
      const T* in = input + (b * d.in_channels + i) * L;
      acc += dot(gout + r.begin, in + r.begin + r.offset, r.end - r.begin);
    }
    gw[j] += acc;
  }
}

template <typename T>
void conv_backward_bias_cell(const Conv1dDims& d, const T* grad_output, T* grad_bias,
                             std::size_t o) {
  T acc = 0;
  for (std::size_t b = 0; b < d.batch; ++b) {
    acc += sum(grad_output + (b * d.out_channels + o) * d.length, d.length);
  }
  grad_bias[o] += acc;
}

template <typename T>
void nearest_row(const T* points, const T* centers, std::size_t k, std::size_t dim,
                 std::uint32_t* index, T* sq_distance, std::size_t p) {
  const T* x = points + p * dim;
  T best = std::numeric_limits<T>::infinity();
  std::uint32_t best_k = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const T dist = squared_distance(x, centers + c * dim, dim);
    if (dist < best) {
      best = dist;
      best_k = static_cast<std::uint32_t>(c);
    }
  }
  index[p] = best_k;
  sq_distance[p] = best;
}

template <typename T>
double silhouette_point(const T* points, std::size_t n, std::size_t dim,
                        const std::uint32_t* labels, const std::vector<std::size_t>& counts,
                        std::size_t p) {
  std::vector<double> totals(counts.size(), 0.0);
  const T* x = points + p * dim;
  for (std::size_t q = 0; q < n; ++q) {
    if (q == p) continue;
    totals[labels[q]] += std::sqrt(static_cast<double>(squared_distance(x, points + q * dim, dim)));
  }
  const std::size_t own = labels[p];
  if (counts[own] <= 1) return 0.0;
  const double a = totals[own] / static_cast<double>(counts[own] - 1);
  double b = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c == own || counts[c] == 0) continue;
    b = std::min(b, totals[c] / static_cast<double>(counts[c]));
  }
  if (!std::isfinite(b)) return 0.0;
  const double denom = std::max(a, b);
  return denom > 0.0 ? (b - a) / denom : 0.0;
}

inline std::vector<std::size_t> cluster_counts(std::span<const std::uint32_t> labels,
                                               std::size_t clusters) {
  std::vector<std::size_t> counts(clusters, 0);
  for (auto l : labels) ++counts.at(l);
  return counts;
}

}  // namespace smq::kernels::inner
