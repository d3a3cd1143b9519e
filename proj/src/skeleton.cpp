#include "smq/skeleton.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

#include "smq/error.hpp"

namespace smq {

namespace fs = std::filesystem;

namespace {

constexpr char kSkelMagic[4] = {'S', 'K', 'L', '1'};
constexpr char kLabelMagic[4] = {'S', 'K', 'L', 'L'};
constexpr std::uint32_t kSkelVersion = 1;
constexpr std::size_t kSkelHeaderBytes = 4 + 4 * 4 + 4 + 4;

class ByteWriter {
 public:
  void raw(const char* bytes, std::size_t n) { out_.insert(out_.end(), bytes, bytes + n); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  const std::vector<char>& bytes() const { return out_; }

 private:
  std::vector<char> out_;
};

class ByteReader {
 public:
  ByteReader(std::vector<char> bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw ParseError(ParseError::Code::truncated,
                       source_ + ": truncated while reading " + what);
    }
  }
  void magic(const char (&expected)[4]) {
    need(4, "magic");
    if (std::memcmp(bytes_.data() + pos_, expected, 4) != 0) {
      throw ParseError(ParseError::Code::bad_magic,
                       source_ + ": bad magic, expected '" + std::string(expected, 4) + "'");
    }
    pos_ += 4;
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  std::uint8_t byte(std::size_t i) const { return static_cast<std::uint8_t>(bytes_[i]); }

  std::vector<char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

void SkeletonSequence::validate(std::optional<std::size_t> num_classes) const {
  if (channels < 1 || frames < 1 || joints < 1) {
    throw InvalidArgument(id + ": C, T and V must all be at least 1");
  }
  if (data.size() != channels * frames * joints) {
    throw InvalidArgument(id + ": data length does not match C*T*V");
  }
  if (!(fps > 0.0f) || !std::isfinite(fps)) throw InvalidArgument(id + ": fps must be positive");
  if (root_joint >= joints) throw InvalidArgument(id + ": root joint out of range");
  if (!std::all_of(data.begin(), data.end(), [](float x) { return std::isfinite(x); })) {
    throw InvalidArgument(id + ": non-finite sample");
  }
  if (labels) {
    if (labels->size() != frames) throw InvalidArgument(id + ": label count != frame count");
    for (int l : *labels) {
      if (l < 0 || (num_classes && static_cast<std::size_t>(l) >= *num_classes)) {
        throw InvalidArgument(id + ": label " + std::to_string(l) + " out of range");
      }
    }
  }
}

bool Dataset::has_labels() const {
  return !sequences.empty() &&
         std::all_of(sequences.begin(), sequences.end(),
                     [](const SkeletonSequence& s) { return s.labels.has_value(); });
}

void save_skel1(const SkeletonSequence& seq, const fs::path& path) {
  ByteWriter w;
  w.raw(kSkelMagic, 4);
  w.u32(kSkelVersion);
  w.u32(static_cast<std::uint32_t>(seq.channels));
  w.u32(static_cast<std::uint32_t>(seq.frames));
  w.u32(static_cast<std::uint32_t>(seq.joints));
  w.f32(seq.fps);
  w.u32(static_cast<std::uint32_t>(seq.root_joint));
  for (float v : seq.data) w.f32(v);
  write_file(path, w.bytes());
}

SkeletonSequence load_skel1(const fs::path& path) {
  ByteReader r(read_file(path), path.string());
  r.magic(kSkelMagic);
  const std::uint32_t version = r.u32("version");
  if (version != kSkelVersion) {
    throw ParseError(ParseError::Code::version,
                     path.string() + ": unsupported SKEL1 version " + std::to_string(version));
  }
  SkeletonSequence seq;
  seq.id = path.stem().string();
  seq.channels = r.u32("C");
  seq.frames = r.u32("T");
  seq.joints = r.u32("V");
  seq.fps = r.f32("fps");
  seq.root_joint = r.u32("root_joint");
  const std::size_t count = seq.channels * seq.frames * seq.joints;
  if (r.remaining() / 4 < count) {
    throw ParseError(ParseError::Code::truncated,
                     path.string() + ": header declares " + std::to_string(count) +
                         " values but payload holds " + std::to_string(r.remaining() / 4));
  }
  seq.data.resize(count);
  for (auto& v : seq.data) v = r.f32("payload");
  if (r.remaining() != 0) {
    throw ParseError(ParseError::Code::format, path.string() + ": trailing bytes after payload");
  }
  return seq;
}

void save_labels(const std::vector<int>& labels, const fs::path& path) {
  ByteWriter w;
  w.raw(kLabelMagic, 4);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 0xFFFF) throw InvalidArgument("label " + std::to_string(l) + " does not fit u16");
    w.u16(static_cast<std::uint16_t>(l));
  }
  write_file(path, w.bytes());
}

std::vector<int> load_labels(const fs::path& path) {
  ByteReader r(read_file(path), path.string());
  r.magic(kLabelMagic);
  const std::uint32_t count = r.u32("T");
  if (r.remaining() / 2 < count) {
    throw ParseError(ParseError::Code::truncated,
                     path.string() + ": label file declares " + std::to_string(count) + " frames");
  }
  std::vector<int> labels(count);
  for (auto& l : labels) l = r.u16("label");
  if (r.remaining() != 0) {
    throw ParseError(ParseError::Code::format, path.string() + ": trailing bytes after labels");
  }
  return labels;
}

fs::path labels_path_for(const fs::path& sequence_path) {
  fs::path p = sequence_path;
  p.replace_extension(".skll");
  return p;
}

SkeletonSequence load_sequence(const fs::path& path) {
  SkeletonSequence seq = load_skel1(path);
  const fs::path lp = labels_path_for(path);
  if (fs::exists(lp)) seq.labels = load_labels(lp);
  return seq;
}

void save_sequence(const SkeletonSequence& seq, const fs::path& path) {
  save_skel1(seq, path);
  if (seq.labels) save_labels(*seq.labels, labels_path_for(path));
}

DatasetManifest parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  DatasetManifest manifest;
  manifest.base_dir = path.parent_path();
  std::string line;
  bool have_k = false;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_k) {
      if (line.rfind("K=", 0) != 0) {
        throw ParseError(ParseError::Code::format, path.string() + ": first line must be K=<int>");
      }
      try {
        std::size_t used = 0;
        const long k = std::stol(line.substr(2), &used);
        if (used != line.size() - 2 || k < 1) throw std::invalid_argument("k");
        manifest.num_classes = static_cast<std::size_t>(k);
      } catch (const std::exception&) {
        throw ParseError(ParseError::Code::format, path.string() + ": invalid header '" + line + "'");
      }
      have_k = true;
      continue;
    }
    manifest.sequence_paths.push_back(line);
  }
  if (!have_k) throw ParseError(ParseError::Code::format, path.string() + ": missing K=<int> header");
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "K=" << manifest.num_classes << '\n';
  for (const auto& p : manifest.sequence_paths) out << p << '\n';
}

Dataset load_dataset(const fs::path& manifest_path) {
  const DatasetManifest manifest = parse_manifest(manifest_path);
  Dataset dataset;
  dataset.num_classes = manifest.num_classes;
  for (const auto& rel : manifest.sequence_paths) {
    const fs::path full = manifest.base_dir / rel;
    if (!fs::exists(full)) throw IoError("manifest entry does not exist: " + full.string());
    SkeletonSequence seq = load_sequence(full);
    seq.validate(manifest.num_classes);
    dataset.sequences.push_back(std::move(seq));
  }
  if (dataset.sequences.empty()) throw InvalidArgument(manifest_path.string() + ": no sequences");
  return dataset;
}

fs::path write_dataset(const Dataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
  DatasetManifest manifest;
  manifest.base_dir = dir;
  manifest.num_classes = dataset.num_classes;
  for (const auto& seq : dataset.sequences) {
    const std::string name = seq.id + ".skl1";
    save_sequence(seq, dir / name);
    manifest.sequence_paths.push_back(name);
  }
  const fs::path manifest_path = dir / "manifest.txt";
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

SkeletonSequence root_center(const SkeletonSequence& seq,
                             const std::vector<std::size_t>& position_channels) {
  if (seq.root_joint >= seq.joints) throw InvalidArgument("root_center: root joint out of range");
  for (auto c : position_channels) {
    if (c >= seq.channels) throw InvalidArgument("root_center: channel out of range");
  }
  SkeletonSequence out = seq;
  for (auto c : position_channels) {
    for (std::size_t t = 0; t < seq.frames; ++t) {
      const float root = seq.at(c, t, seq.root_joint);
      for (std::size_t v = 0; v < seq.joints; ++v) out.at(c, t, v) = seq.at(c, t, v) - root;
    }
  }
  return out;
}

SkeletonSequence downsample(const SkeletonSequence& seq, std::size_t factor) {
  if (factor < 1) throw InvalidArgument("downsample: factor must be at least 1");
  SkeletonSequence out = seq;
  out.frames = (seq.frames + factor - 1) / factor;
  out.fps = seq.fps / static_cast<float>(factor);
  out.data.assign(seq.channels * out.frames * seq.joints, 0.0f);
  for (std::size_t c = 0; c < seq.channels; ++c) {
    for (std::size_t t = 0; t < out.frames; ++t) {
      for (std::size_t v = 0; v < seq.joints; ++v) out.at(c, t, v) = seq.at(c, t * factor, v);
    }
  }
  if (seq.labels) {
    std::vector<int> labels(out.frames);
    for (std::size_t t = 0; t < out.frames; ++t) labels[t] = (*seq.labels)[t * factor];
    out.labels = std::move(labels);
  }
  return out;
}

ChannelStats channel_stats(const std::vector<SkeletonSequence>& seqs) {
  if (seqs.empty()) throw InvalidArgument("channel_stats: empty dataset");
  const std::size_t C = seqs.front().channels;
  std::vector<double> sum(C, 0.0), sq(C, 0.0);
  std::vector<std::size_t> count(C, 0);
  for (const auto& s : seqs) {
    if (s.channels != C) throw InvalidArgument("channel_stats: channel count differs across sequences");
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < s.frames * s.joints; ++i) {
        const double x = s.data[c * s.frames * s.joints + i];
        sum[c] += x;
        sq[c] += x * x;
      }
      count[c] += s.frames * s.joints;
    }
  }
  ChannelStats stats;
  for (std::size_t c = 0; c < C; ++c) {
    const double m = sum[c] / static_cast<double>(count[c]);
    const double var = std::max(0.0, sq[c] / static_cast<double>(count[c]) - m * m);
    stats.mean.push_back(m);
    stats.stddev.push_back(var > 0.0 ? std::sqrt(var) : 1.0);
  }
  return stats;
}

SkeletonSequence standardize(const SkeletonSequence& seq, const ChannelStats& stats) {
  if (stats.mean.size() != seq.channels) throw InvalidArgument("standardize: channel count mismatch");
  SkeletonSequence out = seq;
  for (std::size_t c = 0; c < seq.channels; ++c) {
    for (std::size_t i = 0; i < seq.frames * seq.joints; ++i) {
      auto& x = out.data[c * seq.frames * seq.joints + i];
      x = static_cast<float>((x - stats.mean[c]) / stats.stddev[c]);
    }
  }
  return out;
}

Batch make_batch(const std::vector<SkeletonSequence>& seqs, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw InvalidArgument("make_batch: empty batch");
  Batch batch;
  const auto& first = seqs.at(indices.front());
  batch.size = indices.size();
  batch.channels = first.channels;
  batch.joints = first.joints;
  batch.indices = indices;
  for (auto i : indices) {
    const auto& s = seqs.at(i);
    if (s.channels != batch.channels || s.joints != batch.joints) {
      throw InvalidArgument("make_batch: sequences disagree on C or V");
    }
    batch.max_length = std::max(batch.max_length, s.frames);
    batch.lengths.push_back(s.frames);
  }
  const std::size_t C = batch.channels, T = batch.max_length, V = batch.joints;
  batch.data.assign(batch.size * C * T * V, 0.0f);
  batch.mask.assign(batch.size * T, 0.0f);
  for (std::size_t n = 0; n < batch.size; ++n) {
    const auto& s = seqs[indices[n]];
    for (std::size_t c = 0; c < C; ++c) {
      std::copy_n(s.data.begin() + c * s.frames * V, s.frames * V,
                  batch.data.begin() + ((n * C + c) * T) * V);
    }
    std::fill_n(batch.mask.begin() + n * T, s.frames, 1.0f);
  }
  return batch;
}

std::vector<Batch> make_batches(const std::vector<SkeletonSequence>& seqs, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
  if (seqs.empty()) throw InvalidArgument("make_batches: empty dataset");
  if (batch_size == 0) throw InvalidArgument("make_batches: batch size must be positive");
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    batches.push_back(make_batch(seqs, {order.begin() + static_cast<std::ptrdiff_t>(start),
                                        order.begin() + static_cast<std::ptrdiff_t>(stop)}));
  }
  return batches;
}

}  // namespace smq
