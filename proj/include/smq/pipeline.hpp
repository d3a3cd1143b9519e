#pragma once

// Training loop, inference, checkpoint archive and K sweep.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "smq/adam.hpp"
#include "smq/config.hpp"
#include "smq/metrics.hpp"
#include "smq/model.hpp"
#include "smq/quantizer.hpp"
#include "smq/skeleton.hpp"

namespace smq {

/// Everything needed to segment new data: the resolved config, the data
/// dimensions it was trained on, the network and the codebook.
struct Checkpoint {
  TrainConfig config;  // k and position_channels resolved
  std::size_t channels = 0;
  std::size_t joints = 0;
  std::size_t root_joint = 0;
  double fps = 0.0;
  std::size_t patch_size = 0;
  ChannelStats input_stats;  // empty unless config.standardize
  Autoencoder<float> autoencoder;
  Codebook<float> codebook;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double l_rec = 0.0;
  double l_commit = 0.0;
  double l_total = 0.0;
  std::vector<std::size_t> usage;  // patches per word in this batch

  nlohmann::json to_json() const;
};

struct EvalRecord {
  std::size_t epoch = 0;
  MetricsReport report;

  nlohmann::json to_json() const;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;

  std::string to_jsonl() const;
  void write_jsonl(const std::filesystem::path& path) const;
};

struct Inference {
  std::vector<LabelSeq> labels;      // one per sequence, original length
  std::vector<float> patches;        // valid latent patches, row-major
  std::vector<int> patch_words;      // word of each row in `patches`
  std::size_t patch_dim = 0;
};

/// Runs the whole dataset through encoder and quantizer without touching the
/// codebook. Sequences must match the checkpoint's C, V and patch size.
Inference infer(const Dataset& data, const Checkpoint& ckpt, std::size_t batch_size = 8);
std::vector<LabelSeq> segment(const Dataset& data, const Checkpoint& ckpt);

/// Hungarian-matched metrics of `pred` against the dataset labels.
MetricsReport evaluate_predictions(const Dataset& data, const std::vector<LabelSeq>& pred,
                                   std::size_t num_pred, EvalScope scope = EvalScope::global,
                                   const EvalOptions& options = {});

/// Fills k, position_channels and validates against the dataset.
TrainConfig resolve_config(const Dataset& data, TrainConfig cfg);

/// One training run, step by step.
class Trainer {
 public:
  Trainer(const Dataset& data, const TrainConfig& cfg);
  Trainer(Dataset&&, const TrainConfig&) = delete;

  /// encode, patchify, quantize, EMA, straight-through, decode, loss,
  /// backprop, Adam.
  StepRecord step(const Batch& batch);

  /// Batches of one epoch in the order they will be fed.
  std::vector<Batch> epoch_batches(std::size_t epoch) const;

  /// Trains cfg.epochs epochs. `on_step` sees every record as it is logged.
  void run(const std::function<void(const StepRecord&)>& on_step = {});

  const Checkpoint& checkpoint() const { return ckpt_; }
  Checkpoint& checkpoint() { return ckpt_; }
  const TrainLog& log() const { return log_; }
  std::size_t steps_taken() const { return step_; }

 private:
  Tensor<float> batch_tensor(const Batch& batch) const;
  void restart_dead_words(const std::vector<std::size_t>& counts, std::span<const float> patches,
                          const PatchAssignment& assignment);

  const Dataset& data_;
  Checkpoint ckpt_;
  std::vector<SkeletonSequence> standardized_;
  LossConfig loss_;
  Adam<float> optimizer_;
  TrainLog log_;
  std::size_t step_ = 0;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> idle_steps_;
  std::mt19937_64 restart_rng_;
};

struct TrainResult {
  Checkpoint checkpoint;
  TrainLog log;
};

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const StepRecord&)>& on_step = {});

struct SweepRow {
  std::size_t k = 0;
  std::optional<double> silhouette;     // empty when fewer than two words are used
  std::optional<MetricsReport> report;  // when the dataset has labels
  std::size_t words_used = 0;
};

/// Trains one model per K with the same seed and reports the silhouette of
/// the latent patches under their word assignment.
std::vector<SweepRow> sweep_k(const Dataset& data, const TrainConfig& cfg, const std::vector<std::size_t>& ks,
                              const std::function<void(const SweepRow&)>& on_row = {});

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace smq
