#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "smq/ops.hpp"

namespace smq {

enum class ReconstructionLoss { inter_joint, plain_mse, root_distance };

inline std::string to_string(ReconstructionLoss v) {
  switch (v) {
    case ReconstructionLoss::inter_joint: return "inter_joint";
    case ReconstructionLoss::plain_mse: return "mse";
    case ReconstructionLoss::root_distance: return "root_distance";
  }
  return "inter_joint";
}

inline ReconstructionLoss parse_reconstruction_loss(const std::string& s) {
  if (s == "inter_joint") return ReconstructionLoss::inter_joint;
  if (s == "mse" || s == "plain_mse") return ReconstructionLoss::plain_mse;
  if (s == "root_distance") return ReconstructionLoss::root_distance;
  throw InvalidArgument("unknown reconstruction loss '" + s + "'");
}

struct LossConfig {
  ReconstructionLoss reconstruction = ReconstructionLoss::inter_joint;
  double lambda = 0.001;
  std::vector<std::size_t> position_channels{0, 1, 2};
  std::size_t root_joint = 0;
};

namespace detail {

template <typename T>
void check_pair(const Tensor<T>& x, const Tensor<T>& x_hat, const Tensor<T>& mask) {
  if (x.rank() != 4) throw ShapeError("loss: expected [N, C, T, V] inputs");
  require_same_shape(x, x_hat, "loss");
  if (mask.rank() != 2 || mask.dim(0) != x.dim(0) || mask.dim(1) != x.dim(2)) {
    throw ShapeError("loss: mask must be [N, T]");
  }
}

template <typename T>
double valid_frames(const Tensor<T>& mask) {
  double n = 0.0;
  for (T m : mask.data()) n += static_cast<double>(m);
  if (n <= 0.0) throw InvalidArgument("loss: mask selects no frames");
  return n;
}

/// mask [N, T] -> constant [N, T, a, b] (or [N, T, a] when b == 0).
template <typename T>
Tensor<T> expand_mask(const Tensor<T>& mask, std::size_t a, std::size_t b) {
  const std::size_t per = a * (b == 0 ? 1 : b);
  std::vector<T> out(mask.numel() * per);
  const auto m = mask.data();
  for (std::size_t i = 0; i < m.size(); ++i) std::fill_n(out.begin() + i * per, per, m[i]);
  Shape shape{mask.dim(0), mask.dim(1), a};
  if (b != 0) shape.push_back(b);
  return Tensor<T>(std::move(shape), std::move(out));
}

/// [N, Cp, T, V] -> Euclidean distance of every joint pair, [N, T, V, V].
template <typename T>
Tensor<T> pairwise_joint_distances(const Tensor<T>& pos) {
  const std::size_t N = pos.dim(0), C = pos.dim(1), L = pos.dim(2), V = pos.dim(3);
  Tensor<T> rows = repeat(reshape(pos, {N, C, L, V, 1}), 4, V);  // [.., v, w] = x_v
  Tensor<T> cols = repeat(reshape(pos, {N, C, L, 1, V}), 3, V);  // [.., v, w] = x_w
  return sqrt(sum(square(sub(rows, cols)), {1}));
}

/// [N, Cp, T, V] -> distance of every joint to `root`, [N, T, V].
template <typename T>
Tensor<T> root_joint_distances(const Tensor<T>& pos, std::size_t root) {
  const std::size_t V = pos.dim(3);
  Tensor<T> r = repeat(index_select(pos, 3, {root}), 3, V);
  return sqrt(sum(square(sub(pos, r)), {1}));
}

template <typename T>
void check_channels(const Tensor<T>& x, const std::vector<std::size_t>& channels) {
  if (channels.empty()) throw InvalidArgument("loss: no position channels");
  for (auto c : channels) {
    if (c >= x.dim(1)) throw InvalidArgument("loss: position channel out of range");
  }
}

}  // namespace detail

/// Mean over valid frames and all (v, w) joint pairs of the squared
/// difference between pairwise joint distances of X and X_hat, computed on
/// the position channels only. Diagonal pairs count in the V^2 normaliser.
template <typename T>
Tensor<T> inter_joint_mse(const Tensor<T>& x, const Tensor<T>& x_hat, const Tensor<T>& mask,
                          const std::vector<std::size_t>& position_channels) {
  detail::check_pair(x, x_hat, mask);
  detail::check_channels(x, position_channels);
  const double frames = detail::valid_frames(mask);
  const std::size_t V = x.dim(3);
  Tensor<T> d_ref = detail::pairwise_joint_distances(index_select(detach(x), 1, position_channels));
  Tensor<T> d_hat = detail::pairwise_joint_distances(index_select(x_hat, 1, position_channels));
  Tensor<T> err = mul(square(sub(d_hat, d_ref)), detail::expand_mask(mask, V, V));
  return scale(sum_all(err), static_cast<T>(1.0 / (frames * static_cast<double>(V * V))));
}

/// Masked mean of squared elementwise differences over every channel.
template <typename T>
Tensor<T> plain_mse(const Tensor<T>& x, const Tensor<T>& x_hat, const Tensor<T>& mask) {
  detail::check_pair(x, x_hat, mask);
  const double frames = detail::valid_frames(mask);
  const std::size_t N = x.dim(0), C = x.dim(1), L = x.dim(2), V = x.dim(3);
  // mask [N, T] -> [N, C, T, V]
  std::vector<T> m(N * C * L * V);
  const auto src = mask.data();
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t t = 0; t < L; ++t) {
        std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(((n * C + c) * L + t) * V), V, src[n * L + t]);
      }
    }
  }
  Tensor<T> err = mul(square(sub(x_hat, detach(x))), Tensor<T>(x.shape(), std::move(m)));
  return scale(sum_all(err), static_cast<T>(1.0 / (frames * static_cast<double>(C * V))));
}

/// As inter_joint_mse with w restricted to the root joint.
template <typename T>
Tensor<T> root_distance_mse(const Tensor<T>& x, const Tensor<T>& x_hat, const Tensor<T>& mask,
                            std::size_t root_joint, const std::vector<std::size_t>& position_channels) {
  detail::check_pair(x, x_hat, mask);
  detail::check_channels(x, position_channels);
  if (root_joint >= x.dim(3)) throw InvalidArgument("root_distance_mse: root joint out of range");
  const double frames = detail::valid_frames(mask);
  const std::size_t V = x.dim(3);
  Tensor<T> d_ref = detail::root_joint_distances(index_select(detach(x), 1, position_channels), root_joint);
  Tensor<T> d_hat = detail::root_joint_distances(index_select(x_hat, 1, position_channels), root_joint);
  Tensor<T> err = mul(square(sub(d_hat, d_ref)), detail::expand_mask(mask, V, 0));
  return scale(sum_all(err), static_cast<T>(1.0 / (frames * static_cast<double>(V))));
}

template <typename T>
Tensor<T> reconstruction_loss(const LossConfig& cfg, const Tensor<T>& x, const Tensor<T>& x_hat,
                              const Tensor<T>& mask) {
  switch (cfg.reconstruction) {
    case ReconstructionLoss::inter_joint: return inter_joint_mse(x, x_hat, mask, cfg.position_channels);
    case ReconstructionLoss::plain_mse: return plain_mse(x, x_hat, mask);
    case ReconstructionLoss::root_distance:
      return root_distance_mse(x, x_hat, mask, cfg.root_joint, cfg.position_channels);
  }
  throw InvalidArgument("reconstruction_loss: unknown variant");
}

/// Sum over valid patches of ||sg[q_i] - p_i||^2. patches/quantized are
/// [N, M, P, W]; validity has N * M entries.
template <typename T>
Tensor<T> commitment(const Tensor<T>& patches, const Tensor<T>& quantized,
                     const std::vector<std::uint8_t>& validity) {
  detail::require_same_shape(patches, quantized, "commitment");
  if (patches.rank() < 2) throw ShapeError("commitment: expected [N, M, ...] patches");
  const std::size_t rows = patches.dim(0) * patches.dim(1);
  if (validity.size() != rows) throw ShapeError("commitment: validity length != N * M");
  const std::size_t per = patches.numel() / rows;
  std::vector<T> m(patches.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(r * per), per, validity[r] ? T(1) : T(0));
  }
  Tensor<T> err = mul(square(sub(patches, detach(quantized))), Tensor<T>(patches.shape(), std::move(m)));
  return sum_all(err);
}

/// lambda * L_rec + L_commit.
template <typename T>
Tensor<T> total_loss(const Tensor<T>& reconstruction, const Tensor<T>& commit, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("total_loss: lambda must be >= 0");
  return add(scale(reconstruction, static_cast<T>(lambda)), commit);
}

}  // namespace smq
