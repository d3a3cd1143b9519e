#pragma once

// Sequence-to-sequence temporal autoencoder built from multi-stage dilated
// residual TCNs. In disentangled mode every joint's C x T series is a separate
// batch item through shared weights, so the latent keeps one D-dimensional
// block per joint.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "smq/ops.hpp"

namespace smq {

struct ModelConfig {
  std::size_t stages = 2;
  std::size_t layers_per_stage = 3;
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 16;
  std::size_t kernel = 3;
  bool disentangled_encoder = true;
  bool disentangled_decoder = true;

  void validate() const {
    if (stages < 1 || layers_per_stage < 1 || hidden_dim < 1 || latent_dim < 1) {
      throw InvalidArgument("model config: stages, layers, hidden_dim and latent_dim must be >= 1");
    }
    if (kernel % 2 == 0) throw InvalidArgument("model config: kernel size must be odd");
  }
};

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
struct ConvParams {
  Tensor<T> weight;  // [out, in, k]
  Tensor<T> bias;    // [out]

  /// Kaiming-uniform with negative slope sqrt(5): bound 1 / sqrt(fan_in).
  static ConvParams kaiming(std::size_t in, std::size_t out, std::size_t k, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in * k));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> w(out * in * k);
    for (auto& x : w) x = static_cast<T>(dist(rng));
    return {Tensor<T>({out, in, k}, std::move(w), true), Tensor<T>::zeros({out}, true)};
  }
};

template <typename T>
struct ResidualLayer {
  ConvParams<T> dilated;
  ConvParams<T> pointwise;
  std::size_t dilation = 1;
};

template <typename T>
struct TcnStage {
  ConvParams<T> input;
  std::vector<ResidualLayer<T>> layers;
  ConvParams<T> output;
};

/// Multi-stage TCN: each stage is a 1x1 projection to the hidden width,
/// residual blocks dilated 1, 2, 4, ... and a 1x1 projection to `out_dim`.
/// Stage s > 0 consumes the previous stage's `out_dim`-wide output.
template <typename T>
class Tcn {
 public:
  Tcn() = default;

  Tcn(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, const ModelConfig& cfg,
      std::mt19937_64& rng)
      : in_dim_(in_dim), out_dim_(out_dim) {
    for (std::size_t s = 0; s < cfg.stages; ++s) {
      TcnStage<T> stage;
      stage.input = ConvParams<T>::kaiming(s == 0 ? in_dim : out_dim, hidden_dim, 1, rng);
      for (std::size_t l = 0; l < cfg.layers_per_stage; ++l) {
        ResidualLayer<T> layer;
        layer.dilation = std::size_t{1} << l;
        layer.dilated = ConvParams<T>::kaiming(hidden_dim, hidden_dim, cfg.kernel, rng);
        layer.pointwise = ConvParams<T>::kaiming(hidden_dim, hidden_dim, 1, rng);
        stage.layers.push_back(std::move(layer));
      }
      stage.output = ConvParams<T>::kaiming(hidden_dim, out_dim, 1, rng);
      stages_.push_back(std::move(stage));
    }
  }

  /// x [B, in_dim, T], mask [B, T] -> [B, out_dim, T]; activations are
  /// zeroed on masked frames after every block.
  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& mask) const {
    Tensor<T> h = x;
    for (const auto& stage : stages_) {
      Tensor<T> y = mask_time(conv1d(h, stage.input.weight, stage.input.bias), mask);
      for (const auto& layer : stage.layers) {
        Tensor<T> r = relu(conv1d(y, layer.dilated.weight, layer.dilated.bias, layer.dilation));
        r = conv1d(r, layer.pointwise.weight, layer.pointwise.bias);
        y = mask_time(add(y, r), mask);
      }
      h = mask_time(conv1d(y, stage.output.weight, stage.output.bias), mask);
    }
    return h;
  }

  void collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) const {
    auto push = [&](const std::string& name, const ConvParams<T>& p) {
      out.push_back({prefix + name + ".weight", p.weight});
      out.push_back({prefix + name + ".bias", p.bias});
    };
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      const std::string sp = "stage" + std::to_string(s) + ".";
      push(sp + "in", stages_[s].input);
      for (std::size_t l = 0; l < stages_[s].layers.size(); ++l) {
        const std::string lp = sp + "layer" + std::to_string(l) + ".";
        push(lp + "dilated", stages_[s].layers[l].dilated);
        push(lp + "pointwise", stages_[s].layers[l].pointwise);
      }
      push(sp + "out", stages_[s].output);
    }
  }

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }

 private:
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  std::vector<TcnStage<T>> stages_;
};

/// Encoder/decoder pair for sequences with `channels` features per joint and
/// `joints` joints.
template <typename T>
class Autoencoder {
 public:
  Autoencoder() = default;

  Autoencoder(const ModelConfig& cfg, std::size_t channels, std::size_t joints, std::uint64_t seed)
      : cfg_(cfg), channels_(channels), joints_(joints) {
    cfg.validate();
    if (channels < 1 || joints < 1) throw InvalidArgument("autoencoder: C and V must be >= 1");
    std::mt19937_64 rng(seed);
    const std::size_t D = cfg.latent_dim, H = cfg.hidden_dim;
    encoder_ = cfg.disentangled_encoder ? Tcn<T>(channels, H, D, cfg, rng)
                                        : Tcn<T>(channels * joints, H, joints * D, cfg, rng);
    decoder_ = cfg.disentangled_decoder ? Tcn<T>(D, H, channels, cfg, rng)
                                        : Tcn<T>(joints * D, H, channels * joints, cfg, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  std::size_t channels() const { return channels_; }
  std::size_t joints() const { return joints_; }
  std::size_t latent_width() const { return joints_ * cfg_.latent_dim; }

  /// X [N, C, T, V], mask [N, T] -> Z [N, T, V*D]; joint v owns columns
  /// [v*D, (v+1)*D).
  Tensor<T> encode(const Tensor<T>& x, const Tensor<T>& mask) const {
    if (x.rank() != 4 || x.dim(1) != channels_ || x.dim(3) != joints_) {
      throw ShapeError("encode: expected [N," + std::to_string(channels_) + ",T," +
                       std::to_string(joints_) + "], got " + to_string(x.shape()));
    }
    check_mask(mask, x.dim(0), x.dim(2));
    const std::size_t N = x.dim(0), C = channels_, L = x.dim(2), V = joints_, D = cfg_.latent_dim;
    if (cfg_.disentangled_encoder) {
      Tensor<T> per_joint = reshape(permute(x, {0, 3, 1, 2}), {N * V, C, L});
      Tensor<T> z = encoder_.forward(per_joint, joint_mask(mask, V));
      return reshape(permute(reshape(z, {N, V, D, L}), {0, 3, 1, 2}), {N, L, V * D});
    }
    // Entangled: joints of a frame are one (V*C)-wide sample, joint-major to
    // match the latent layout.
    Tensor<T> flat = reshape(permute(x, {0, 3, 1, 2}), {N, V * C, L});
    Tensor<T> z = encoder_.forward(flat, mask);
    return permute(z, {0, 2, 1});
  }

  /// Q [N, T, V*D], mask [N, T] -> X_hat [N, C, T, V].
  Tensor<T> decode(const Tensor<T>& q, const Tensor<T>& mask) const {
    const std::size_t V = joints_, D = cfg_.latent_dim, C = channels_;
    if (q.rank() != 3 || q.dim(2) != V * D) {
      throw ShapeError("decode: expected [N,T," + std::to_string(V * D) + "], got " +
                       to_string(q.shape()));
    }
    const std::size_t N = q.dim(0), L = q.dim(1);
    check_mask(mask, N, L);
    if (cfg_.disentangled_decoder) {
      Tensor<T> per_joint = reshape(permute(reshape(q, {N, L, V, D}), {0, 2, 3, 1}), {N * V, D, L});
      Tensor<T> y = decoder_.forward(per_joint, joint_mask(mask, V));
      return permute(reshape(y, {N, V, C, L}), {0, 2, 3, 1});
    }
    Tensor<T> y = decoder_.forward(permute(q, {0, 2, 1}), mask);
    return permute(reshape(y, {N, V, C, L}), {0, 2, 3, 1});
  }

  std::vector<NamedTensor<T>> named_parameters() const {
    std::vector<NamedTensor<T>> out;
    encoder_.collect("encoder.", out);
    decoder_.collect("decoder.", out);
    return out;
  }

  std::vector<Tensor<T>> parameters() const {
    std::vector<Tensor<T>> out;
    for (auto& p : named_parameters()) out.push_back(p.tensor);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : named_parameters()) n += p.tensor.numel();
    return n;
  }

 private:
  static void check_mask(const Tensor<T>& mask, std::size_t n, std::size_t length) {
    if (mask.rank() != 2 || mask.dim(0) != n || mask.dim(1) != length) {
      throw ShapeError("autoencoder: mask must be [N, T], got " + to_string(mask.shape()));
    }
  }

  // [N, T] -> [N*V, T], row n*V + v copies row n.
  static Tensor<T> joint_mask(const Tensor<T>& mask, std::size_t joints) {
    const std::size_t N = mask.dim(0), L = mask.dim(1);
    std::vector<T> out(N * joints * L);
    const auto m = mask.data();
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t v = 0; v < joints; ++v) {
        std::copy_n(m.begin() + n * L, L, out.begin() + (n * joints + v) * L);
      }
    }
    return Tensor<T>({N * joints, L}, std::move(out));
  }

  ModelConfig cfg_;
  std::size_t channels_ = 0;
  std::size_t joints_ = 0;
  Tcn<T> encoder_;
  Tcn<T> decoder_;
};

}  // namespace smq
