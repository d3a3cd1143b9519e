#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "smq/error.hpp"
#include "smq/skeleton.hpp"

namespace smq {

std::vector<ActionMotion> random_motions(std::size_t actions, std::size_t channels,
                                         std::size_t joints, std::uint64_t seed,
                                         const MotionRanges& ranges) {
  if (!(ranges.min_amplitude <= ranges.max_amplitude) || !(ranges.min_frequency <= ranges.max_frequency) ||
      !(ranges.max_offset >= 0.0f) || !(ranges.min_separation >= 0.0f) ||
      !(ranges.frequency_quantum >= 0.0f)) {
    throw InvalidArgument("synthetic: invalid motion ranges");
  }
  std::mt19937_64 rng(seed ^ 0x5eed5eed5eedULL);
  std::uniform_real_distribution<float> offset(-ranges.max_offset, ranges.max_offset);
  std::uniform_real_distribution<float> amplitude(ranges.min_amplitude, ranges.max_amplitude);
  std::uniform_real_distribution<float> frequency(ranges.min_frequency, ranges.max_frequency);
  std::uniform_real_distribution<float> phase(0.0f, 2.0f * std::numbers::pi_v<float>);
  const std::size_t n = channels * joints;
  auto rms_distance = [n](const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(n));
  };
  constexpr int kMaxTries = 10000;
  std::vector<ActionMotion> motions(actions);
  for (std::size_t a = 0; a < actions; ++a) {
    auto& m = motions[a];
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxTries) {
        throw InvalidArgument("synthetic: cannot place " + std::to_string(actions) +
                              " actions with the requested offset separation");
      }
      m.offset.clear();
      for (std::size_t i = 0; i < n; ++i) m.offset.push_back(offset(rng));
      bool far = true;
      for (std::size_t b = 0; b < a && far; ++b) far = rms_distance(m.offset, motions[b].offset) >= ranges.min_separation;
      if (far) break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      m.amplitude.push_back(amplitude(rng));
      float f = frequency(rng);
      if (ranges.frequency_quantum > 0.0f) {
        f = std::max(1.0f, std::round(f / ranges.frequency_quantum)) * ranges.frequency_quantum;
      }
      m.frequency.push_back(f);
      m.phase.push_back(phase(rng));
    }
  }
  return motions;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.actions == 0) throw InvalidArgument("synthetic: need at least one action");
  if (spec.joints == 0 || spec.channels == 0 || !(spec.fps > 0.0f)) {
    throw InvalidArgument("synthetic: joints, channels and fps must be positive");
  }
  if (spec.min_segments == 0 || spec.min_segments > spec.max_segments) {
    throw InvalidArgument("synthetic: empty segments-per-sequence range");
  }
  if (!(spec.segment_quantum_seconds >= 0.0)) throw InvalidArgument("synthetic: negative segment quantum");
  if (!(spec.min_segment_seconds > 0.0) || spec.min_segment_seconds > spec.max_segment_seconds) {
    throw InvalidArgument("synthetic: empty segment length range");
  }
  const std::size_t n = spec.channels * spec.joints;
  const auto motions = spec.motions.empty()
                           ? random_motions(spec.actions, spec.channels, spec.joints, spec.seed, spec.ranges)
                           : spec.motions;
  if (motions.size() != spec.actions) throw InvalidArgument("synthetic: one motion table per action");
  for (const auto& m : motions) {
    if (m.offset.size() != n || m.amplitude.size() != n || m.frequency.size() != n ||
        m.phase.size() != n) {
      throw InvalidArgument("synthetic: motion tables must be C*V long");
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> segment_count(spec.min_segments, spec.max_segments);
  std::uniform_real_distribution<double> segment_seconds(spec.min_segment_seconds,
                                                         spec.max_segment_seconds);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  Dataset dataset;
  dataset.num_classes = spec.actions;
  for (std::size_t s = 0; s < spec.sequences; ++s) {
    // Segment plan: (action, length in frames).
    std::vector<std::pair<int, std::size_t>> plan;
    const std::size_t segments = segment_count(rng);
    int previous = -1;
    for (std::size_t k = 0; k < segments; ++k) {
      const int actions = static_cast<int>(spec.actions);
      int action = 0;
      if (previous < 0 || actions == 1) {
        action = std::uniform_int_distribution<int>(0, actions - 1)(rng);
      } else {
        // any action except the previous one
        action = std::uniform_int_distribution<int>(0, actions - 2)(rng);
        if (action >= previous) ++action;
      }
      double seconds = segment_seconds(rng);
      if (spec.segment_quantum_seconds > 0.0) {
        seconds = std::max(1.0, std::round(seconds / spec.segment_quantum_seconds)) * spec.segment_quantum_seconds;
      }
      const auto frames = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seconds * spec.fps)));
      plan.emplace_back(action, frames);
      previous = action;
    }

    SkeletonSequence seq;
    char name[32];
    std::snprintf(name, sizeof(name), "seq_%03zu", s);
    seq.id = name;
    seq.channels = spec.channels;
    seq.joints = spec.joints;
    seq.fps = spec.fps;
    seq.root_joint = 0;
    for (const auto& [a, len] : plan) seq.frames += len;
    seq.data.assign(spec.channels * seq.frames * spec.joints, 0.0f);
    std::vector<int> labels;
    labels.reserve(seq.frames);

    std::size_t t = 0;
    for (const auto& [action, len] : plan) {
      const ActionMotion& m = motions[static_cast<std::size_t>(action)];
      for (std::size_t i = 0; i < len; ++i, ++t) {
        const double time = static_cast<double>(t) / spec.fps;
        for (std::size_t c = 0; c < spec.channels; ++c) {
          for (std::size_t v = 0; v < spec.joints; ++v) {
            const std::size_t p = c * spec.joints + v;
            double x = m.offset[p] + m.amplitude[p] * std::sin(two_pi * m.frequency[p] * time + m.phase[p]);
            if (spec.noise_sigma > 0.0) x += spec.noise_sigma * noise(rng);
            seq.at(c, t, v) = static_cast<float>(x);
          }
        }
        labels.push_back(action);
      }
    }
    seq.labels = std::move(labels);
    dataset.sequences.push_back(std::move(seq));
  }
  return dataset;
}

}  // namespace smq
