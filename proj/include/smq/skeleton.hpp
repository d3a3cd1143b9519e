#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace smq {

/// A multivariate skeleton time series stored channel-major: data[c][t][v].
struct SkeletonSequence {
  std::string id;
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::size_t joints = 0;
  std::vector<float> data;
  float fps = 0.0f;
  std::size_t root_joint = 0;
  std::optional<std::vector<int>> labels;  // one class index per frame

  float at(std::size_t c, std::size_t t, std::size_t v) const {
    return data[(c * frames + t) * joints + v];
  }
  float& at(std::size_t c, std::size_t t, std::size_t v) {
    return data[(c * frames + t) * joints + v];
  }

  /// Throws InvalidArgument on any broken invariant. `num_classes` bounds the
  /// labels when given.
  void validate(std::optional<std::size_t> num_classes = std::nullopt) const;
};

struct Dataset {
  std::vector<SkeletonSequence> sequences;
  std::size_t num_classes = 0;  // K declared by the manifest

  bool has_labels() const;
};

// --- SKEL1 / SKLL files ------------------------------------------------------

void save_skel1(const SkeletonSequence& seq, const std::filesystem::path& path);
/// Reads the sequence payload only; labels are left empty.
SkeletonSequence load_skel1(const std::filesystem::path& path);

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);
std::vector<int> load_labels(const std::filesystem::path& path);

/// `<dir>/<stem>.skll` for a sequence file `<dir>/<stem>.<ext>`.
std::filesystem::path labels_path_for(const std::filesystem::path& sequence_path);

/// load_skel1 plus the sibling label file when it exists.
SkeletonSequence load_sequence(const std::filesystem::path& path);
/// save_skel1 plus the sibling label file when `seq.labels` is set.
void save_sequence(const SkeletonSequence& seq, const std::filesystem::path& path);

// --- Manifests ---------------------------------------------------------------

struct DatasetManifest {
  std::filesystem::path base_dir;       // paths below are relative to this
  std::vector<std::string> sequence_paths;
  std::size_t num_classes = 0;
};

DatasetManifest parse_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& manifest_path);
/// Writes every sequence as `<dir>/<id>.skl1` (+ labels) and `<dir>/manifest.txt`.
std::filesystem::path write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// --- Preprocessing -------------------------------------------------------------

/// Subtracts the root joint's position from every joint, frame by frame, on
/// the given positional channels.
SkeletonSequence root_center(const SkeletonSequence& seq,
                             const std::vector<std::size_t>& position_channels);

/// Keeps frames 0, factor, 2*factor, ...
SkeletonSequence downsample(const SkeletonSequence& seq, std::size_t factor);

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

ChannelStats channel_stats(const std::vector<SkeletonSequence>& seqs);
SkeletonSequence standardize(const SkeletonSequence& seq, const ChannelStats& stats);

// --- Batching --------------------------------------------------------------------

struct Batch {
  std::size_t size = 0;
  std::size_t channels = 0;
  std::size_t max_length = 0;
  std::size_t joints = 0;
  std::vector<float> data;           // [N, C, T_max, V], zero past each length
  std::vector<float> mask;           // [N, T_max], 1 on valid frames
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> indices;  // positions in the source sequence list
};

Batch make_batch(const std::vector<SkeletonSequence>& seqs, const std::vector<std::size_t>& indices);

/// Splits the sequences into batches padded to the longest member. With a
/// seed the order is a seeded shuffle; without one it is the input order.
std::vector<Batch> make_batches(const std::vector<SkeletonSequence>& seqs, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// --- Synthetic data ----------------------------------------------------------------

/// Per-joint, per-channel sinusoid of one action; all tables are [C * V].
struct ActionMotion {
  std::vector<float> offset;
  std::vector<float> amplitude;
  std::vector<float> frequency;  // Hz
  std::vector<float> phase;      // radians
};

/// Sampling ranges for random_motions. `min_separation` is the smallest RMS
/// distance allowed between the offset tables of two actions.
struct MotionRanges {
  float max_offset = 1.0f;
  float min_amplitude = 0.3f;
  float max_amplitude = 0.8f;
  float min_frequency = 1.0f;
  float max_frequency = 2.0f;
  float frequency_quantum = 1.0f;  // > 0: frequencies rounded to multiples of this (Hz)
  float min_separation = 0.8f;
};

struct SyntheticSpec {
  std::size_t actions = 4;
  std::size_t joints = 4;
  std::size_t channels = 3;
  float fps = 50.0f;
  std::size_t sequences = 20;
  double min_segment_seconds = 3.0;
  double max_segment_seconds = 6.0;
  std::size_t min_segments = 4;
  std::size_t max_segments = 6;
  double noise_sigma = 0.02;
  double segment_quantum_seconds = 1.0;  // > 0: segment lengths are whole multiples of this
  std::uint64_t seed = 7;
  MotionRanges ranges;
  std::vector<ActionMotion> motions;  // derived from the seed when empty
};

std::vector<ActionMotion> random_motions(std::size_t actions, std::size_t channels,
                                         std::size_t joints, std::uint64_t seed,
                                         const MotionRanges& ranges = {});

/// Sequences made of consecutive action segments. Consecutive segments always
/// use different actions; every frame is labelled with its generating action.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace smq
