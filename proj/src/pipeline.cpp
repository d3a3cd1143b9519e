#include "smq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "smq/error.hpp"
#include "smq/losses.hpp"

namespace smq {

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'M', 'Q', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void check_dataset(const Dataset& data) {
  if (data.sequences.empty()) throw InvalidArgument("dataset is empty");
  const auto& first = data.sequences.front();
  for (const auto& s : data.sequences) {
    if (s.channels != first.channels || s.joints != first.joints) {
      throw InvalidArgument("sequence '" + s.id + "' has C=" + std::to_string(s.channels) +
                            ", V=" + std::to_string(s.joints) + " but '" + first.id + "' has C=" +
                            std::to_string(first.channels) + ", V=" + std::to_string(first.joints));
    }
    if (s.fps != first.fps) {
      throw InvalidArgument("sequence '" + s.id + "' has a different frame rate than '" + first.id + "'");
    }
    if (s.frames == 0) throw InvalidArgument("sequence '" + s.id + "' has no frames");
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(out, bits);
}

float get_f32(std::span<const std::uint8_t> bytes, std::size_t at) {
  const auto bits = static_cast<std::uint32_t>(get_le(bytes, at, 4));
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

struct RawTensor {
  std::string name;
  Shape shape;
  std::span<const float> values;
};

std::vector<RawTensor> checkpoint_tensors(const Checkpoint& ckpt) {
  std::vector<RawTensor> out;
  for (const auto& p : ckpt.autoencoder.named_parameters()) {
    out.push_back({p.name, p.tensor.shape(), p.tensor.data()});
  }
  const auto& cb = ckpt.codebook;
  for (std::size_t k = 0; k < cb.size(); ++k) {
    out.push_back({"word_" + std::to_string(k), Shape{cb.patch_size(), cb.width()}, cb.word(k)});
  }
  return out;
}

}  // namespace

// --- Checkpoint archive ------------------------------------------------------

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  const auto tensors = checkpoint_tensors(ckpt);
  nlohmann::json header;
  header["format"] = "smq-checkpoint";
  header["version"] = kCheckpointVersion;
  header["config"] = config_to_map(ckpt.config);
  header["data"] = {{"channels", ckpt.channels},
                    {"joints", ckpt.joints},
                    {"root_joint", ckpt.root_joint},
                    {"fps", ckpt.fps},
                    {"patch_size", ckpt.patch_size}};
  if (!ckpt.input_stats.mean.empty()) {
    header["data"]["mean"] = ckpt.input_stats.mean;
    header["data"]["stddev"] = ckpt.input_stats.stddev;
  }
  nlohmann::json list = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    list.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.values.size() * sizeof(float);
  }
  header["tensors"] = list;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + sizeof kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& t : tensors) {
    for (float v : t.values) put_f32(out, v);
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t fixed = sizeof kCheckpointMagic + 4 + 8;
  if (bytes.size() < sizeof kCheckpointMagic ||
      !std::equal(kCheckpointMagic, kCheckpointMagic + sizeof kCheckpointMagic, bytes.begin())) {
    throw ParseError(ParseError::Code::bad_magic, "checkpoint: bad magic");
  }
  if (bytes.size() < fixed) throw ParseError(ParseError::Code::truncated, "checkpoint: truncated header");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, sizeof kCheckpointMagic, 4));
  if (version != kCheckpointVersion) {
    throw ParseError(ParseError::Code::version, "checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint64_t header_len = get_le(bytes, sizeof kCheckpointMagic + 4, 8);
  if (header_len > bytes.size() - fixed) {
    throw ParseError(ParseError::Code::truncated, "checkpoint: truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + fixed, bytes.begin() + static_cast<std::ptrdiff_t>(fixed + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Code::format, std::string("checkpoint: header is not JSON: ") + e.what());
  }
  const std::size_t payload = fixed + header_len;

  Checkpoint ckpt;
  try {
    for (const auto& [key, value] : header.at("config").items()) {
      set_config_value(ckpt.config, key, value.get<std::string>());
    }
    const auto& d = header.at("data");
    ckpt.channels = d.at("channels").get<std::size_t>();
    ckpt.joints = d.at("joints").get<std::size_t>();
    ckpt.root_joint = d.at("root_joint").get<std::size_t>();
    ckpt.fps = d.at("fps").get<double>();
    ckpt.patch_size = d.at("patch_size").get<std::size_t>();
    if (d.contains("mean")) {
      ckpt.input_stats.mean = d.at("mean").get<std::vector<double>>();
      ckpt.input_stats.stddev = d.at("stddev").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Code::format, std::string("checkpoint: bad header: ") + e.what());
  }
  const auto& stats = ckpt.input_stats;
  if (stats.mean.size() != stats.stddev.size() || (!stats.mean.empty() && stats.mean.size() != ckpt.channels)) {
    throw ParseError(ParseError::Code::format, "checkpoint: channel statistics do not match C");
  }
  ckpt.autoencoder = Autoencoder<float>(ckpt.config.model, ckpt.channels, ckpt.joints, 0);
  ckpt.codebook = Codebook<float>(ckpt.config.k, ckpt.patch_size, ckpt.autoencoder.latent_width());

  std::map<std::string, nlohmann::json> entries;
  std::size_t end = payload;
  for (const auto& t : header.at("tensors")) entries[t.at("name").get<std::string>()] = t;
  auto fill = [&](const std::string& name, const Shape& shape, std::span<float> dst) {
    const auto it = entries.find(name);
    if (it == entries.end()) throw ParseError(ParseError::Code::format, "checkpoint: missing tensor " + name);
    if (it->second.at("shape").get<Shape>() != shape) {
      throw ParseError(ParseError::Code::format, "checkpoint: tensor " + name + " has shape " +
                                                     it->second.at("shape").dump() + ", expected " +
                                                     to_string(shape));
    }
    const std::size_t start = payload + it->second.at("offset").get<std::size_t>();
    if (start > bytes.size() || (bytes.size() - start) / sizeof(float) < dst.size()) {
      throw ParseError(ParseError::Code::truncated, "checkpoint: tensor " + name + " is truncated");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = get_f32(bytes, start + i * sizeof(float));
    end = std::max(end, start + dst.size() * sizeof(float));
    entries.erase(it);
  };
  for (auto& p : ckpt.autoencoder.named_parameters()) {
    Tensor<float> t = p.tensor;
    fill(p.name, t.shape(), t.mutable_data());
  }
  for (std::size_t k = 0; k < ckpt.codebook.size(); ++k) {
    fill("word_" + std::to_string(k), Shape{ckpt.patch_size, ckpt.codebook.width()}, ckpt.codebook.word(k));
  }
  if (!entries.empty()) {
    throw ParseError(ParseError::Code::format, "checkpoint: unexpected tensor " + entries.begin()->first);
  }
  if (end != bytes.size()) {
    throw ParseError(ParseError::Code::format,
                     "checkpoint: " + std::to_string(bytes.size() - end) + " trailing bytes");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

// --- Logs ----------------------------------------------------------------------

nlohmann::json StepRecord::to_json() const {
  return {{"type", "step"}, {"epoch", epoch},       {"step", step},  {"l_rec", l_rec},
          {"l_commit", l_commit}, {"l_total", l_total}, {"usage", usage}};
}

nlohmann::json EvalRecord::to_json() const {
  return {{"type", "eval"}, {"epoch", epoch}, {"report", report.to_json()}};
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& s : steps) out += s.to_json().dump() + "\n";
  for (const auto& e : evals) out += e.to_json().dump() + "\n";
  return out;
}

void TrainLog::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write log " + path.string());
  out << to_jsonl();
}

// --- Inference ----------------------------------------------------------------

namespace {

std::vector<SkeletonSequence> standardized(const std::vector<SkeletonSequence>& seqs, const ChannelStats& stats) {
  std::vector<SkeletonSequence> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(standardize(s, stats));
  return out;
}

}  // namespace

Inference infer(const Dataset& data, const Checkpoint& ckpt, std::size_t batch_size) {
  check_dataset(data);
  if (batch_size < 1) throw InvalidArgument("infer: batch size must be >= 1");
  const auto& first = data.sequences.front();
  if (first.channels != ckpt.channels || first.joints != ckpt.joints) {
    throw InvalidArgument("data has C=" + std::to_string(first.channels) + ", V=" +
                          std::to_string(first.joints) + " but the checkpoint expects C=" +
                          std::to_string(ckpt.channels) + ", V=" + std::to_string(ckpt.joints));
  }
  if (ckpt.config.patch_frames(first.fps) != ckpt.patch_size) {
    throw InvalidArgument("data frame rate gives a patch size different from the checkpoint's " +
                          std::to_string(ckpt.patch_size));
  }
  Inference out;
  out.labels.resize(data.sequences.size());
  out.patch_dim = ckpt.codebook.word_dim();
  const std::size_t P = ckpt.patch_size;
  const bool scale = !ckpt.input_stats.mean.empty();
  const auto scaled = scale ? standardized(data.sequences, ckpt.input_stats) : std::vector<SkeletonSequence>{};
  for (const auto& batch : make_batches(scale ? scaled : data.sequences, batch_size)) {
    const Tensor<float> x({batch.size, batch.channels, batch.max_length, batch.joints}, batch.data);
    const Tensor<float> mask({batch.size, batch.max_length}, batch.mask);
    const Patched<float> patched = patchify(detach(ckpt.autoencoder.encode(x, mask)), P);
    const std::size_t M = patched.patches.dim(1);
    const auto valid = patch_validity(batch.lengths, M, P);
    const Quantized<float> q = quantize(patched.patches, ckpt.codebook, valid);
    auto labels = segmentation_from_assignment(q.assignment, P, batch.lengths);
    const auto src = patched.patches.data();
    for (std::size_t n = 0; n < batch.size; ++n) {
      out.labels[batch.indices[n]] = std::move(labels[n]);
    }
    // Patch rows in dataset order.
    std::vector<std::size_t> order(batch.size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return batch.indices[a] < batch.indices[b]; });
    for (auto n : order) {
      for (std::size_t m = 0; m < M; ++m) {
        const std::size_t row = n * M + m;
        if (!valid[row]) continue;
        const auto begin = src.begin() + static_cast<std::ptrdiff_t>(row * out.patch_dim);
        out.patches.insert(out.patches.end(), begin, begin + static_cast<std::ptrdiff_t>(out.patch_dim));
        out.patch_words.push_back(q.assignment.index[row]);
      }
    }
  }
  return out;
}

std::vector<LabelSeq> segment(const Dataset& data, const Checkpoint& ckpt) { return infer(data, ckpt).labels; }

MetricsReport evaluate_predictions(const Dataset& data, const std::vector<LabelSeq>& pred, std::size_t num_pred,
                                   EvalScope scope, const EvalOptions& options) {
  if (!data.has_labels()) throw InvalidArgument("evaluation needs ground-truth labels for every sequence");
  std::vector<LabelSeq> gt;
  for (const auto& s : data.sequences) gt.push_back(*s.labels);
  return evaluate(scope, pred, gt, num_pred, data.num_classes, options);
}

// --- Training -------------------------------------------------------------------

TrainConfig resolve_config(const Dataset& data, TrainConfig cfg) {
  check_dataset(data);
  cfg.validate();
  if (cfg.k == 0) cfg.k = data.num_classes;
  if (cfg.k < 1) throw InvalidArgument("K must be >= 1 (set k or declare K in the manifest)");
  const std::size_t C = data.sequences.front().channels;
  if (cfg.position_channels.empty()) {
    for (std::size_t c = 0; c < std::min<std::size_t>(C, 3); ++c) cfg.position_channels.push_back(c);
  }
  for (auto c : cfg.position_channels) {
    if (c >= C) throw InvalidArgument("position channel " + std::to_string(c) + " >= C=" + std::to_string(C));
  }
  cfg.patch_frames(data.sequences.front().fps);
  return cfg;
}

namespace {

Checkpoint initial_checkpoint(const Dataset& data, const TrainConfig& raw) {
  Checkpoint ckpt;
  ckpt.config = resolve_config(data, raw);
  const auto& first = data.sequences.front();
  ckpt.channels = first.channels;
  ckpt.joints = first.joints;
  ckpt.root_joint = first.root_joint;
  ckpt.fps = first.fps;
  ckpt.patch_size = ckpt.config.patch_frames(first.fps);
  if (ckpt.config.standardize) ckpt.input_stats = channel_stats(data.sequences);
  const std::uint64_t seed = ckpt.config.seed;
  ckpt.autoencoder = Autoencoder<float>(ckpt.config.model, ckpt.channels, ckpt.joints, mix_seed(seed, 0));
  const std::size_t K = ckpt.config.k, P = ckpt.patch_size, W = ckpt.autoencoder.latent_width();
  if (ckpt.config.init == CodebookInit::random) {
    ckpt.codebook = Codebook<float>::kaiming(K, P, W, mix_seed(seed, 1));
    return ckpt;
  }
  // k-means over latent patches of the freshly initialised encoder.
  ckpt.codebook = Codebook<float>(K, P, W);
  const Inference inf = infer(data, ckpt);
  const std::size_t rows = inf.patch_words.size(), dim = inf.patch_dim;
  std::vector<std::size_t> pick(rows);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  if (ckpt.config.kmeans_sample > 0 && rows > ckpt.config.kmeans_sample) {
    std::mt19937_64 rng(mix_seed(seed, 2));
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(ckpt.config.kmeans_sample);
    std::sort(pick.begin(), pick.end());
  }
  std::vector<float> sample;
  sample.reserve(pick.size() * dim);
  for (auto r : pick) {
    const auto begin = inf.patches.begin() + static_cast<std::ptrdiff_t>(r * dim);
    sample.insert(sample.end(), begin, begin + static_cast<std::ptrdiff_t>(dim));
  }
  ckpt.codebook = kmeans_init<float>(sample, K, P, W, mix_seed(seed, 3));
  return ckpt;
}

}  // namespace

Trainer::Trainer(const Dataset& data, const TrainConfig& cfg)
    : data_(data),
      ckpt_(initial_checkpoint(data, cfg)),
      optimizer_(ckpt_.autoencoder.parameters(), AdamOptions{.lr = ckpt_.config.lr}),
      idle_steps_(ckpt_.config.k, 0),
      restart_rng_(mix_seed(ckpt_.config.seed, 4)) {
  loss_.reconstruction = ckpt_.config.loss;
  loss_.lambda = ckpt_.config.lambda;
  loss_.position_channels = ckpt_.config.position_channels;
  loss_.root_joint = ckpt_.root_joint;
  if (loss_.root_joint >= ckpt_.joints) throw InvalidArgument("root joint out of range");
  if (!ckpt_.input_stats.mean.empty()) standardized_ = standardized(data_.sequences, ckpt_.input_stats);
}

std::vector<Batch> Trainer::epoch_batches(std::size_t epoch) const {
  std::optional<std::uint64_t> order;
  if (ckpt_.config.shuffle) order = mix_seed(ckpt_.config.seed, 100 + epoch);
  return make_batches(standardized_.empty() ? data_.sequences : standardized_, ckpt_.config.batch_size, order);
}

StepRecord Trainer::step(const Batch& batch) {
  const TrainConfig& cfg = ckpt_.config;
  const std::size_t P = ckpt_.patch_size;
  const Tensor<float> x({batch.size, batch.channels, batch.max_length, batch.joints}, batch.data);
  const Tensor<float> mask({batch.size, batch.max_length}, batch.mask);

  const Tensor<float> z = ckpt_.autoencoder.encode(x, mask);
  const Patched<float> patched = patchify(z, P);
  const auto valid = patch_validity(batch.lengths, patched.patches.dim(1), P);
  const Quantized<float> q = quantize(patched.patches, ckpt_.codebook, valid);
  const auto counts = ema_update(ckpt_.codebook, patched.patches.data(), q.assignment, cfg.alpha);
  if (cfg.dead_word_restart) restart_dead_words(counts, patched.patches.data(), q.assignment);

  const Tensor<float> z_q = depatchify(straight_through(patched.patches, q.values), patched.length);
  const Tensor<float> x_hat = ckpt_.autoencoder.decode(z_q, mask);
  const Tensor<float> l_rec = reconstruction_loss(loss_, x, x_hat, mask);
  const Tensor<float> l_commit = commitment(patched.patches, q.values, valid);
  const Tensor<float> l_total = total_loss(l_rec, l_commit, cfg.lambda);

  StepRecord rec;
  rec.epoch = epoch_;
  rec.step = step_;
  rec.l_rec = l_rec.item();
  rec.l_commit = l_commit.item();
  rec.l_total = l_total.item();
  rec.usage = counts;
  if (!std::isfinite(rec.l_rec) || !std::isfinite(rec.l_commit) || !std::isfinite(rec.l_total)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << step_ << " (epoch " << epoch_ << "): L_rec=" << rec.l_rec
        << " L_commit=" << rec.l_commit << " L_total=" << rec.l_total;
    throw NumericError(msg.str());
  }
  optimizer_.zero_grad();
  backward(l_total);
  optimizer_.step();
  ++step_;
  log_.steps.push_back(rec);
  return rec;
}

void Trainer::restart_dead_words(const std::vector<std::size_t>& counts, std::span<const float> patches,
                                 const PatchAssignment& assignment) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment.valid.size(); ++i) {
    if (assignment.valid[i]) rows.push_back(i);
  }
  const std::size_t dim = ckpt_.codebook.word_dim();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    idle_steps_[k] = counts[k] == 0 ? idle_steps_[k] + 1 : 0;
    if (idle_steps_[k] < ckpt_.config.dead_word_patience || rows.empty()) continue;
    const std::size_t r = rows[std::uniform_int_distribution<std::size_t>(0, rows.size() - 1)(restart_rng_)];
    const auto src = patches.subspan(r * dim, dim);
    std::copy(src.begin(), src.end(), ckpt_.codebook.word(k).begin());
    idle_steps_[k] = 0;
  }
}

void Trainer::run(const std::function<void(const StepRecord&)>& on_step) {
  const TrainConfig& cfg = ckpt_.config;
  for (epoch_ = 0; epoch_ < cfg.epochs; ++epoch_) {
    for (const auto& batch : epoch_batches(epoch_)) {
      const StepRecord rec = step(batch);
      if (on_step) on_step(rec);
    }
    const bool last = epoch_ + 1 == cfg.epochs;
    if (cfg.eval_every > 0 && data_.has_labels() && ((epoch_ + 1) % cfg.eval_every == 0 || last)) {
      log_.evals.push_back({epoch_, evaluate_predictions(data_, segment(data_, ckpt_), cfg.k)});
    }
  }
}

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const StepRecord&)>& on_step) {
  Trainer trainer(data, cfg);
  trainer.run(on_step);
  return {trainer.checkpoint(), trainer.log()};
}

// --- K sweep --------------------------------------------------------------------

std::vector<SweepRow> sweep_k(const Dataset& data, const TrainConfig& cfg, const std::vector<std::size_t>& ks,
                              const std::function<void(const SweepRow&)>& on_row) {
  if (ks.empty()) throw InvalidArgument("sweep: K range is empty");
  for (auto k : ks) {
    if (k < 2) throw InvalidArgument("sweep: silhouette needs K >= 2, got K=" + std::to_string(k));
  }
  std::vector<SweepRow> rows;
  for (auto k : ks) {
    TrainConfig run = cfg;
    run.k = k;
    const TrainResult result = train(data, run);
    const Inference inf = infer(data, result.checkpoint);
    SweepRow row;
    row.k = k;
    std::vector<int> used = inf.patch_words;
    std::sort(used.begin(), used.end());
    row.words_used = static_cast<std::size_t>(std::unique(used.begin(), used.end()) - used.begin());
    if (row.words_used >= 2) {
      row.silhouette = silhouette(inf.patches, inf.patch_dim, inf.patch_words, cfg.silhouette_cap, cfg.seed);
    }
    if (data.has_labels()) row.report = evaluate_predictions(data, inf.labels, k);
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["k"] = r.k;
    j["silhouette"] = r.silhouette ? nlohmann::json(*r.silhouette) : nlohmann::json(nullptr);
    j["words_used"] = r.words_used;
    j["metrics"] = r.report ? r.report->to_json() : nlohmann::json(nullptr);
    out.push_back(j);
  }
  return out;
}

}  // namespace smq
