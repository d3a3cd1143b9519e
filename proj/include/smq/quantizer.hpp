#pragma once

// Temporal patching, nearest-motion-word assignment and the EMA codebook.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "smq/kernels.hpp"
#include "smq/ops.hpp"

namespace smq {

/// K motion words, each a [P, W] latent patch prototype (W = V * D).
template <typename T>
class Codebook {
 public:
  Codebook() = default;
  Codebook(std::size_t words, std::size_t patch_size, std::size_t width)
      : words_(words), patch_size_(patch_size), width_(width),
        values_(words * patch_size * width, T(0)) {
    if (words < 1 || patch_size < 1 || width < 1) {
      throw InvalidArgument("codebook: K, P and W must all be >= 1");
    }
  }

  /// Uniform in +-sqrt(6 / fan_in) with fan_in = P * W.
  static Codebook kaiming(std::size_t words, std::size_t patch_size, std::size_t width,
                          std::uint64_t seed) {
    Codebook cb(words, patch_size, width);
    std::mt19937_64 rng(seed);
    const double bound = std::sqrt(6.0 / static_cast<double>(patch_size * width));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : cb.values_) v = static_cast<T>(dist(rng));
    return cb;
  }

  std::size_t size() const { return words_; }
  std::size_t patch_size() const { return patch_size_; }
  std::size_t width() const { return width_; }
  std::size_t word_dim() const { return patch_size_ * width_; }

  std::span<const T> word(std::size_t k) const {
    return std::span<const T>(values_).subspan(k * word_dim(), word_dim());
  }
  std::span<T> word(std::size_t k) { return std::span<T>(values_).subspan(k * word_dim(), word_dim()); }
  std::span<const T> values() const { return values_; }
  std::span<T> values() { return values_; }

  bool operator==(const Codebook&) const = default;

 private:
  std::size_t words_ = 0;
  std::size_t patch_size_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

template <typename T>
struct Patched {
  Tensor<T> patches;  // [N, M, P, W]
  std::size_t length = 0;  // T before padding
  std::size_t pad = 0;
};

/// Z [N, T, W] -> [N, ceil(T/P), P, W], zero-padding the tail.
template <typename T>
Patched<T> patchify(const Tensor<T>& z, std::size_t patch_size) {
  if (patch_size < 1) throw InvalidArgument("patchify: patch size must be >= 1");
  if (z.rank() != 3) throw ShapeError("patchify: expected [N, T, W], got " + to_string(z.shape()));
  const std::size_t N = z.dim(0), L = z.dim(1), W = z.dim(2);
  const std::size_t M = (L + patch_size - 1) / patch_size;
  const std::size_t pad = M * patch_size - L;
  Tensor<T> padded = pad > 0 ? pad_end(z, 1, pad) : z;
  return {reshape(padded, {N, M, patch_size, W}), L, pad};
}

/// Inverse of patchify: [N, M, P, W] -> [N, length, W].
template <typename T>
Tensor<T> depatchify(const Tensor<T>& patches, std::size_t length) {
  if (patches.rank() != 4) throw ShapeError("depatchify: expected [N, M, P, W]");
  const std::size_t N = patches.dim(0), M = patches.dim(1), P = patches.dim(2), W = patches.dim(3);
  if (length > M * P) throw ShapeError("depatchify: length exceeds patched span");
  Tensor<T> flat = reshape(patches, {N, M * P, W});
  return length == M * P ? flat : slice(flat, 1, 0, length);
}

/// A patch is valid when it holds at least one real frame.
inline std::vector<std::uint8_t> patch_validity(const std::vector<std::size_t>& lengths,
                                                std::size_t patches, std::size_t patch_size) {
  std::vector<std::uint8_t> valid(lengths.size() * patches, 0);
  for (std::size_t n = 0; n < lengths.size(); ++n) {
    for (std::size_t m = 0; m < patches; ++m) valid[n * patches + m] = m * patch_size < lengths[n];
  }
  return valid;
}

struct PatchAssignment {
  std::size_t batch = 0;
  std::size_t patches = 0;             // M per sequence
  std::vector<int> index;              // [N * M], -1 for invalid patches
  std::vector<double> sq_distance;     // [N * M], 0 for invalid patches
  std::vector<std::uint8_t> valid;     // [N * M]

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
};

template <typename T>
struct Quantized {
  Tensor<T> values;  // constant, same shape as the patches
  PatchAssignment assignment;
};

/// Replaces every valid patch by its nearest word (ties -> lowest index).
/// Invalid patches pass through unchanged.
template <typename T>
Quantized<T> quantize(const Tensor<T>& patches, const Codebook<T>& codebook,
                      const std::vector<std::uint8_t>& valid) {
  if (codebook.size() == 0) throw InvalidArgument("quantize: empty codebook");
  if (patches.rank() != 4 || patches.dim(2) != codebook.patch_size() ||
      patches.dim(3) != codebook.width()) {
    throw ShapeError("quantize: patches " + to_string(patches.shape()) + " do not match words [" +
                     std::to_string(codebook.patch_size()) + "," + std::to_string(codebook.width()) + "]");
  }
  const std::size_t N = patches.dim(0), M = patches.dim(1), dim = codebook.word_dim();
  if (valid.size() != N * M) throw ShapeError("quantize: validity length != N * M");

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < N * M; ++i) {
    if (valid[i]) rows.push_back(i);
  }
  const auto src = patches.data();
  std::vector<T> packed(rows.size() * dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(rows[r] * dim), dim,
                packed.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  std::vector<std::uint32_t> nearest(rows.size());
  std::vector<T> dist(rows.size());
  kernels::nearest_rows<T>(packed, codebook.values(), dim, nearest, dist);

  Quantized<T> out;
  out.assignment.batch = N;
  out.assignment.patches = M;
  out.assignment.valid = valid;
  out.assignment.index.assign(N * M, -1);
  out.assignment.sq_distance.assign(N * M, 0.0);
  std::vector<T> values(src.begin(), src.end());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto word = codebook.word(nearest[r]);
    std::copy(word.begin(), word.end(), values.begin() + static_cast<std::ptrdiff_t>(rows[r] * dim));
    out.assignment.index[rows[r]] = static_cast<int>(nearest[r]);
    out.assignment.sq_distance[rows[r]] = static_cast<double>(dist[r]);
  }
  out.values = Tensor<T>(patches.shape(), std::move(values));
  return out;
}

/// c_k <- alpha * c_k + (1 - alpha) * mean of the patches assigned to k.
/// Words with no assigned patch are left untouched. Returns per-word counts.
template <typename T>
std::vector<std::size_t> ema_update(Codebook<T>& codebook, std::span<const T> patches,
                                    const PatchAssignment& assignment, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("ema_update: alpha must be in [0, 1]");
  const std::size_t K = codebook.size(), dim = codebook.word_dim();
  if (patches.size() != assignment.index.size() * dim) {
    throw ShapeError("ema_update: patch data does not match the assignment");
  }
  std::vector<std::vector<double>> sums(K);
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t i = 0; i < assignment.index.size(); ++i) {
    if (!assignment.valid[i]) continue;
    const auto k = static_cast<std::size_t>(assignment.index[i]);
    if (sums[k].empty()) sums[k].assign(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) sums[k][j] += static_cast<double>(patches[i * dim + j]);
    ++counts[k];
  }
  const T keep = static_cast<T>(alpha);
  const T take = static_cast<T>(1.0 - alpha);
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] == 0) continue;
    auto word = codebook.word(k);
    const double inv = 1.0 / static_cast<double>(counts[k]);
    for (std::size_t j = 0; j < dim; ++j) {
      const T batch_mean = static_cast<T>(sums[k][j] * inv);
      word[j] = keep * word[j] + take * batch_mean;
    }
  }
  return counts;
}

/// Frame labels: frame t of sequence n takes the word of patch t / P.
inline std::vector<std::vector<int>> segmentation_from_assignment(
    const PatchAssignment& assignment, std::size_t patch_size, const std::vector<std::size_t>& lengths) {
  if (lengths.size() != assignment.batch) {
    throw ShapeError("segmentation: one length per sequence required");
  }
  std::vector<std::vector<int>> labels(assignment.batch);
  for (std::size_t n = 0; n < assignment.batch; ++n) {
    if (lengths[n] > assignment.patches * patch_size) {
      throw ShapeError("segmentation: length exceeds patched span");
    }
    labels[n].resize(lengths[n]);
    for (std::size_t t = 0; t < lengths[n]; ++t) {
      labels[n][t] = assignment.index[n * assignment.patches + t / patch_size];
    }
  }
  return labels;
}

template <typename T>
struct KMeansResult {
  std::vector<T> centroids;  // [K, dim]
  std::vector<std::uint32_t> labels;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding. An empty cluster keeps its
/// previous centroid.
template <typename T>
KMeansResult<T> kmeans(std::span<const T> rows, std::size_t dim, std::size_t k, std::uint64_t seed,
                       std::size_t max_iterations = 100) {
  if (dim == 0 || rows.size() % dim != 0) throw ShapeError("kmeans: rows not a multiple of dim");
  const std::size_t n = rows.size() / dim;
  if (k < 1) throw InvalidArgument("kmeans: K must be >= 1");
  if (n < k) {
    throw InvalidArgument("kmeans: " + std::to_string(n) + " samples cannot seed " +
                          std::to_string(k) + " clusters");
  }
  std::mt19937_64 rng(seed);
  KMeansResult<T> res;
  res.centroids.resize(k * dim);
  auto row = [&](std::size_t i) { return rows.subspan(i * dim, dim); };

  // k-means++ seeding
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::copy_n(row(first).begin(), dim, res.centroids.begin());
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const auto prev = std::span<const T>(res.centroids).subspan((c - 1) * dim, dim);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      const auto r = row(i);
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = static_cast<double>(r[j]) - static_cast<double>(prev[j]);
        d += diff * diff;
      }
      closest[i] = std::min(closest[i], d);
      total += closest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        target -= closest[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    std::copy_n(row(pick).begin(), dim, res.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
  }

  res.labels.assign(n, 0);
  std::vector<T> dist(n);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::vector<std::uint32_t> labels(n);
    kernels::nearest_rows<T>(rows, res.centroids, dim, labels, dist);
    const bool changed = it == 0 || labels != res.labels;
    res.labels = std::move(labels);
    if (!changed) break;
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = row(i);
      const std::size_t c = res.labels[i];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += static_cast<double>(r[j]);
      ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        res.centroids[c * dim + j] = static_cast<T>(sums[c * dim + j] / static_cast<double>(counts[c]));
      }
    }
  }
  kernels::nearest_rows<T>(rows, res.centroids, dim, res.labels, dist);
  res.inertia = 0.0;
  for (auto d : dist) res.inertia += static_cast<double>(d);
  return res;
}

/// Lowest-inertia result of `restarts` seeded k-means runs (ties keep the
/// earliest run).
template <typename T>
KMeansResult<T> kmeans_best_of(std::span<const T> rows, std::size_t dim, std::size_t k, std::uint64_t seed,
                               std::size_t restarts, std::size_t max_iterations = 100) {
  if (restarts < 1) throw InvalidArgument("kmeans: restarts must be >= 1");
  std::mt19937_64 seeds(seed);
  KMeansResult<T> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    auto run = kmeans<T>(rows, dim, k, seeds(), max_iterations);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

/// Codebook whose words are k-means centroids of a sample of flattened patches.
template <typename T>
Codebook<T> kmeans_init(std::span<const T> sample, std::size_t words, std::size_t patch_size,
                        std::size_t width, std::uint64_t seed, std::size_t restarts = 10,
                        std::size_t max_iterations = 100) {
  Codebook<T> cb(words, patch_size, width);
  const auto km = kmeans_best_of<T>(sample, cb.word_dim(), words, seed, restarts, max_iterations);
  std::copy(km.centroids.begin(), km.centroids.end(), cb.values().begin());
  return cb;
}

}  // namespace smq
