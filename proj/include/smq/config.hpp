#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smq/losses.hpp"
#include "smq/model.hpp"

namespace smq {

enum class CodebookInit { random, kmeans };

std::string to_string(CodebookInit init);
CodebookInit parse_codebook_init(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 8;
  double lr = 5e-4;
  double lambda = 1e-3;
  double alpha = 0.5;
  double patch_seconds = 1.0;
  std::size_t k = 0;  // 0: number of classes declared by the dataset
  std::uint64_t seed = 0;
  ReconstructionLoss loss = ReconstructionLoss::inter_joint;
  CodebookInit init = CodebookInit::random;
  ModelConfig model;
  std::size_t eval_every = 0;  // epochs between evaluations, 0 disables
  bool shuffle = true;
  bool standardize = false;  // z-score every channel with training-set statistics
  bool dead_word_restart = false;
  std::size_t dead_word_patience = 100;
  std::vector<std::size_t> position_channels;  // empty: the first min(C, 3)
  std::size_t kmeans_sample = 5000;            // patches fed to k-means init
  std::size_t silhouette_cap = 5000;

  void validate() const;

  /// P = round(patch_seconds * fps), at least 1.
  std::size_t patch_frames(double fps) const;
};

/// Flat key=value view of a TrainConfig. Every key here is accepted by
/// set_config_value and nothing else is.
std::map<std::string, std::string> config_to_map(const TrainConfig& cfg);
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

/// Parses `key=value` lines ('#' comments allowed) on top of `base`.
TrainConfig parse_config_text(const std::string& text, TrainConfig base = {});
std::string config_to_text(const TrainConfig& cfg);

/// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace smq
