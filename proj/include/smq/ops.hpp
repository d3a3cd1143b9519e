#pragma once

// Differentiable operations over smq::Tensor. Binary ops require identical
// shapes; there is no implicit broadcasting. Use reshape/repeat to align.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "smq/kernels.hpp"
#include "smq/tensor.hpp"

namespace smq {

namespace detail {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

inline void require_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for " +
                     to_string(shape));
  }
}

// Views a shape as [outer, shape[axis], inner].
struct AxisView {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

inline AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

template <typename T, typename Fn, typename Grad>
Tensor<T> unary(const Tensor<T>& x, Fn fn, Grad grad_fn) {
  const auto in = x.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
  return make_result<T>(x.shape(), std::move(out), {x}, [grad_fn](const Node<T>& node) {
    auto* gx = parent_grad(node, 0);
    if (!gx) return;
    const auto& xin = node.parents[0]->data;
    for (std::size_t i = 0; i < node.grad.size(); ++i) {
      (*gx)[i] += grad_fn(xin[i], node.data[i], node.grad[i]);
    }
  });
}

}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "add");
  const auto x = a.data(), y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return detail::make_result<T>(a.shape(), std::move(out), {a, b}, [](const Node<T>& node) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = detail::parent_grad(node, p)) {
        for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "sub");
  const auto x = a.data(), y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return detail::make_result<T>(a.shape(), std::move(out), {a, b}, [](const Node<T>& node) {
    if (auto* g = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
    }
    if (auto* g = detail::parent_grad(node, 1)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] -= node.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "mul");
  const auto x = a.data(), y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return detail::make_result<T>(a.shape(), std::move(out), {a, b}, [](const Node<T>& node) {
    const auto& xa = node.parents[0]->data;
    const auto& xb = node.parents[1]->data;
    if (auto* g = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i] * xb[i];
    }
    if (auto* g = detail::parent_grad(node, 1)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i] * xa[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return detail::unary(
      x, [factor](T v) { return v * factor; }, [factor](T, T, T g) { return g * factor; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return detail::unary(
      x, [](T v) { return v * v; }, [](T v, T, T g) { return T(2) * v * g; });
}

/// Lower bound applied to the argument in the sqrt derivative, so coincident
/// points (zero distance) produce a finite gradient.
inline constexpr double sqrt_grad_floor = 1e-12;

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return detail::unary(
      x, [](T v) { return std::sqrt(v); },
      [](T v, T, T g) {
        return g / (T(2) * std::sqrt(std::max(v, static_cast<T>(sqrt_grad_floor))));
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return detail::unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T, T g) { return v > T(0) ? g : T(0); });
}

/// Same values, no gradient path (the stop-gradient operator).
template <typename T>
Tensor<T> detach(const Tensor<T>& x) {
  return Tensor<T>(x.shape(), std::vector<T>(x.data().begin(), x.data().end()));
}

/// Forward value of `quantized`, gradient routed to `latent` unchanged.
/// Equivalent to latent + detach(quantized - latent) without the rounding of
/// the add/subtract round trip.
template <typename T>
Tensor<T> straight_through(const Tensor<T>& latent, const Tensor<T>& quantized) {
  detail::require_same_shape(latent, quantized, "straight_through");
  std::vector<T> out(quantized.data().begin(), quantized.data().end());
  return detail::make_result<T>(latent.shape(), std::move(out), {latent},
                                [](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    for (std::size_t i = 0; i < node.grad.size(); ++i) {
                                      (*g)[i] += node.grad[i];
                                    }
                                  }
                                });
}

// ---------------------------------------------------------------------------
// Reductions

template <typename T>
Tensor<T> sum(const Tensor<T>& x, std::vector<std::size_t> axes) {
  const Shape& shape = x.shape();
  std::vector<bool> reduced(shape.size(), false);
  for (auto a : axes) {
    detail::require_axis(shape, a, "sum");
    reduced[a] = true;
  }
  Shape out_shape;
  std::vector<std::size_t> out_stride_for(shape.size(), 0);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!reduced[i]) out_shape.push_back(shape[i]);
  }
  const auto out_strides = strides_of(out_shape);
  for (std::size_t i = 0, k = 0; i < shape.size(); ++i) {
    if (!reduced[i]) out_stride_for[i] = out_strides[k++];
  }

  // Destination of every input element, built by walking a multi-index.
  auto map = std::make_shared<std::vector<std::size_t>>(x.numel());
  std::vector<std::size_t> idx(shape.size(), 0);
  std::size_t dst = 0;
  for (std::size_t flat = 0; flat < x.numel(); ++flat) {
    (*map)[flat] = dst;
    for (std::size_t d = shape.size(); d-- > 0;) {
      ++idx[d];
      dst += out_stride_for[d];
      if (idx[d] < shape[d]) break;
      dst -= out_stride_for[d] * idx[d];
      idx[d] = 0;
    }
  }

  std::vector<T> out(numel(out_shape), T(0));
  const auto in = x.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[(*map)[i]] += in[i];
  return detail::make_result<T>(std::move(out_shape), std::move(out), {x},
                                [map](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    for (std::size_t i = 0; i < map->size(); ++i) {
                                      (*g)[i] += node.grad[(*map)[i]];
                                    }
                                  }
                                });
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  std::vector<std::size_t> axes(x.rank());
  std::iota(axes.begin(), axes.end(), std::size_t{0});
  return sum(x, std::move(axes));
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x, std::vector<std::size_t> axes) {
  std::size_t count = 1;
  for (auto a : axes) {
    detail::require_axis(x.shape(), a, "mean");
    count *= x.dim(a);
  }
  return scale(sum(x, std::move(axes)), T(1) / static_cast<T>(count));
}

template <typename T>
Tensor<T> norm2(const Tensor<T>& x, std::size_t axis) {
  return sqrt(sum(square(x), {axis}));
}

// ---------------------------------------------------------------------------
// Shape manipulation

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return detail::make_result<T>(std::move(shape), std::move(out), {x}, [](const Node<T>& node) {
    if (auto* g = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
    }
  });
}

/// out.shape[k] == x.shape[axes[k]].
template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& axes) {
  const Shape& in_shape = x.shape();
  if (axes.size() != in_shape.size()) throw ShapeError("permute: axes rank mismatch");
  std::vector<bool> used(axes.size(), false);
  Shape out_shape(axes.size());
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (axes[k] >= axes.size() || used[axes[k]]) throw ShapeError("permute: invalid axes");
    used[axes[k]] = true;
    out_shape[k] = in_shape[axes[k]];
  }
  const auto in_strides = strides_of(in_shape);
  std::vector<std::size_t> step(axes.size());
  for (std::size_t k = 0; k < axes.size(); ++k) step[k] = in_strides[axes[k]];

  auto src = std::make_shared<std::vector<std::size_t>>(x.numel());
  std::vector<std::size_t> idx(axes.size(), 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < x.numel(); ++flat) {
    (*src)[flat] = offset;
    for (std::size_t d = axes.size(); d-- > 0;) {
      ++idx[d];
      offset += step[d];
      if (idx[d] < out_shape[d]) break;
      offset -= step[d] * idx[d];
      idx[d] = 0;
    }
  }
  const auto in = x.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[(*src)[i]];
  return detail::make_result<T>(std::move(out_shape), std::move(out), {x},
                                [src](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    for (std::size_t i = 0; i < src->size(); ++i) {
                                      (*g)[(*src)[i]] += node.grad[i];
                                    }
                                  }
                                });
}

/// Tiles a size-1 axis `count` times.
template <typename T>
Tensor<T> repeat(const Tensor<T>& x, std::size_t axis, std::size_t count) {
  detail::require_axis(x.shape(), axis, "repeat");
  if (x.dim(axis) != 1) throw ShapeError("repeat: axis must have extent 1 in " + to_string(x.shape()));
  const auto v = detail::axis_view(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = count;
  const auto in = x.data();
  std::vector<T> out(v.outer * count * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t c = 0; c < count; ++c) {
      std::copy_n(in.begin() + o * v.inner, v.inner, out.begin() + (o * count + c) * v.inner);
    }
  }
  return detail::make_result<T>(std::move(out_shape), std::move(out), {x},
                                [v, count](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    for (std::size_t o = 0; o < v.outer; ++o) {
                                      for (std::size_t c = 0; c < count; ++c) {
                                        for (std::size_t i = 0; i < v.inner; ++i) {
                                          (*g)[o * v.inner + i] +=
                                              node.grad[(o * count + c) * v.inner + i];
                                        }
                                      }
                                    }
                                  }
                                });
}

/// Appends `count` zeros along `axis`.
template <typename T>
Tensor<T> pad_end(const Tensor<T>& x, std::size_t axis, std::size_t count) {
  detail::require_axis(x.shape(), axis, "pad_end");
  const auto v = detail::axis_view(x.shape(), axis);
  const std::size_t ext = v.extent + count;
  Shape out_shape = x.shape();
  out_shape[axis] = ext;
  const auto in = x.data();
  std::vector<T> out(v.outer * ext * v.inner, T(0));
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(in.begin() + o * v.extent * v.inner, v.extent * v.inner,
                out.begin() + o * ext * v.inner);
  }
  return detail::make_result<T>(std::move(out_shape), std::move(out), {x},
                                [v, ext](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    const std::size_t block = v.extent * v.inner;
                                    for (std::size_t o = 0; o < v.outer; ++o) {
                                      for (std::size_t i = 0; i < block; ++i) {
                                        (*g)[o * block + i] += node.grad[o * ext * v.inner + i];
                                      }
                                    }
                                  }
                                });
}

/// Elements [begin, end) along `axis`.
template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end) {
  detail::require_axis(x.shape(), axis, "slice");
  if (begin > end || end > x.dim(axis)) throw ShapeError("slice: range out of bounds");
  const auto v = detail::axis_view(x.shape(), axis);
  const std::size_t ext = end - begin;
  Shape out_shape = x.shape();
  out_shape[axis] = ext;
  const auto in = x.data();
  std::vector<T> out(v.outer * ext * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(in.begin() + (o * v.extent + begin) * v.inner, ext * v.inner,
                out.begin() + o * ext * v.inner);
  }
  return detail::make_result<T>(std::move(out_shape), std::move(out), {x},
                                [v, ext, begin](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    for (std::size_t o = 0; o < v.outer; ++o) {
                                      for (std::size_t i = 0; i < ext * v.inner; ++i) {
                                        (*g)[(o * v.extent + begin) * v.inner + i] +=
                                            node.grad[o * ext * v.inner + i];
                                      }
                                    }
                                  }
                                });
}

template <typename T>
Tensor<T> index_select(const Tensor<T>& x, std::size_t axis, std::vector<std::size_t> indices) {
  detail::require_axis(x.shape(), axis, "index_select");
  for (auto i : indices) {
    if (i >= x.dim(axis)) throw ShapeError("index_select: index out of range");
  }
  const auto v = detail::axis_view(x.shape(), axis);
  const std::size_t ext = indices.size();
  Shape out_shape = x.shape();
  out_shape[axis] = ext;
  const auto in = x.data();
  std::vector<T> out(v.outer * ext * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t k = 0; k < ext; ++k) {
      std::copy_n(in.begin() + (o * v.extent + indices[k]) * v.inner, v.inner,
                  out.begin() + (o * ext + k) * v.inner);
    }
  }
  return detail::make_result<T>(
      std::move(out_shape), std::move(out), {x},
      [v, ext, indices = std::move(indices)](const Node<T>& node) {
        if (auto* g = detail::parent_grad(node, 0)) {
          for (std::size_t o = 0; o < v.outer; ++o) {
            for (std::size_t k = 0; k < ext; ++k) {
              for (std::size_t i = 0; i < v.inner; ++i) {
                (*g)[(o * v.extent + indices[k]) * v.inner + i] +=
                    node.grad[(o * ext + k) * v.inner + i];
              }
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Temporal convolution

/// Same-length dilated convolution. input [B, Cin, T], weight [Cout, Cin, k]
/// with k odd, bias [Cout]; zero padding of dilation*(k-1)/2 on both sides.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t dilation = 1) {
  if (input.rank() != 3 || weight.rank() != 3 || bias.rank() != 1) {
    throw ShapeError("conv1d: expected input [B,Cin,T], weight [Cout,Cin,k], bias [Cout]");
  }
  if (input.dim(1) != weight.dim(1)) {
    throw ShapeError("conv1d: input has " + std::to_string(input.dim(1)) +
                     " channels but weight expects " + std::to_string(weight.dim(1)));
  }
  if (bias.dim(0) != weight.dim(0)) throw ShapeError("conv1d: bias length != out channels");
  if (weight.dim(2) % 2 == 0) throw ShapeError("conv1d: kernel size must be odd");
  if (dilation == 0) throw InvalidArgument("conv1d: dilation must be positive");

  const kernels::Conv1dDims d{input.dim(0), input.dim(1), weight.dim(0),
                              input.dim(2), weight.dim(2), dilation};
  std::vector<T> out(d.batch * d.out_channels * d.length);
  kernels::conv1d_forward<T>(d, input.data(), weight.data(), bias.data(), out);
  return detail::make_result<T>(
      Shape{d.batch, d.out_channels, d.length}, std::move(out), {input, weight, bias},
      [d](const Node<T>& node) {
        const auto& in = node.parents[0]->data;
        const auto& w = node.parents[1]->data;
        if (auto* gx = detail::parent_grad(node, 0)) {
          kernels::conv1d_backward_input<T>(d, node.grad, w, *gx);
        }
        auto* gw = detail::parent_grad(node, 1);
        auto* gb = detail::parent_grad(node, 2);
        if (gw || gb) {
          std::vector<T> scratch_w, scratch_b;
          if (!gw) scratch_w.assign(w.size(), T(0));
          if (!gb) scratch_b.assign(d.out_channels, T(0));
          kernels::conv1d_backward_params<T>(d, node.grad, in, gw ? std::span<T>(*gw) : scratch_w,
                                             gb ? std::span<T>(*gb) : scratch_b);
        }
      });
}

/// x [B, C, T] times a constant frame mask [B, T] (repeated over C).
template <typename T>
Tensor<T> mask_time(const Tensor<T>& x, const Tensor<T>& mask) {
  if (x.rank() != 3 || mask.rank() != 2 || mask.dim(0) != x.dim(0) || mask.dim(1) != x.dim(2)) {
    throw ShapeError("mask_time: expected x [B,C,T] and mask [B,T], got " + to_string(x.shape()) +
                     " and " + to_string(mask.shape()));
  }
  const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
  const auto in = x.data();
  const auto m = mask.data();
  std::vector<T> out(in.size());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t row = (b * C + c) * L;
      for (std::size_t t = 0; t < L; ++t) out[row + t] = in[row + t] * m[b * L + t];
    }
  }
  auto mask_copy = std::make_shared<std::vector<T>>(m.begin(), m.end());
  return detail::make_result<T>(x.shape(), std::move(out), {x},
                                [B, C, L, mask_copy](const Node<T>& node) {
                                  if (auto* g = detail::parent_grad(node, 0)) {
                                    for (std::size_t b = 0; b < B; ++b) {
                                      for (std::size_t c = 0; c < C; ++c) {
                                        const std::size_t row = (b * C + c) * L;
                                        for (std::size_t t = 0; t < L; ++t) {
                                          (*g)[row + t] += node.grad[row + t] * (*mask_copy)[b * L + t];
                                        }
                                      }
                                    }
                                  }
                                });
}

}  // namespace smq
