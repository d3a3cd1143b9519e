#include "smq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "smq/error.hpp"
#include "smq/kernels.hpp"

namespace smq {

namespace {

void check_aligned(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("metrics: " + std::to_string(pred.size()) + " predicted vs " +
                          std::to_string(gt.size()) + " ground-truth sequences");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != gt[i].size()) {
      throw InvalidArgument("metrics: sequence " + std::to_string(i) + " has " +
                            std::to_string(pred[i].size()) + " predicted vs " +
                            std::to_string(gt[i].size()) + " ground-truth frames");
    }
  }
}

std::vector<Segment> kept_segments(std::span<const int> labels, const EvalOptions& options) {
  auto segs = to_segments(labels);
  if (!options.exclude_labels.empty()) {
    std::erase_if(segs, [&](const Segment& s) { return options.exclude_labels.count(s.label) > 0; });
  }
  return segs;
}

}  // namespace

std::vector<Segment> to_segments(std::span<const int> labels) {
  std::vector<Segment> segs;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (segs.empty() || segs.back().label != labels[t]) {
      segs.push_back({labels[t], t, t + 1});
    } else {
      segs.back().end = t + 1;
    }
  }
  return segs;
}

std::vector<std::size_t> max_profit_assignment(const std::vector<std::vector<long long>>& profit) {
  const std::size_t n = profit.size();
  for (const auto& row : profit) {
    if (row.size() != n) throw InvalidArgument("assignment: profit matrix must be square");
  }
  if (n == 0) return {};
  long long top = std::numeric_limits<long long>::min();
  for (const auto& row : profit) top = std::max(top, *std::max_element(row.begin(), row.end()));

  // Shortest augmenting path with potentials on cost = top - profit (>= 0).
  // Rows and columns are 1-based; column 0 is a sentinel.
  constexpr long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      long long delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = (top - profit[i0 - 1][j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[owner[j] - 1] = j - 1;
  return row_to_col;
}

int ClusterMapping::map(int pred) const {
  if (pred >= 0 && static_cast<std::size_t>(pred) < pred_to_gt.size() && pred_to_gt[pred] >= 0) {
    return pred_to_gt[pred];
  }
  return static_cast<int>(num_gt) + std::max(pred, 0);
}

std::vector<std::vector<long long>> overlap_matrix(const std::vector<LabelSeq>& pred,
                                                   const std::vector<LabelSeq>& gt,
                                                   std::size_t num_pred, std::size_t num_gt,
                                                   const EvalOptions& options) {
  check_aligned(pred, gt);
  std::vector<std::vector<long long>> overlap(num_pred, std::vector<long long>(num_gt, 0));
  for (std::size_t s = 0; s < pred.size(); ++s) {
    for (std::size_t t = 0; t < pred[s].size(); ++t) {
      const int p = pred[s][t], g = gt[s][t];
      if (options.exclude_labels.count(g)) continue;
      if (p < 0 || static_cast<std::size_t>(p) >= num_pred) {
        throw InvalidArgument("metrics: predicted label " + std::to_string(p) + " outside [0, " +
                              std::to_string(num_pred) + ")");
      }
      if (g < 0 || static_cast<std::size_t>(g) >= num_gt) {
        throw InvalidArgument("metrics: ground-truth label " + std::to_string(g) + " outside [0, " +
                              std::to_string(num_gt) + ")");
      }
      ++overlap[p][g];
    }
  }
  return overlap;
}

ClusterMapping hungarian_match(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                               std::size_t num_pred, std::size_t num_gt, const EvalOptions& options) {
  const auto overlap = overlap_matrix(pred, gt, num_pred, num_gt, options);
  const std::size_t n = std::max(num_pred, num_gt);
  std::vector<std::vector<long long>> square(n, std::vector<long long>(n, 0));
  for (std::size_t p = 0; p < num_pred; ++p) {
    for (std::size_t g = 0; g < num_gt; ++g) square[p][g] = overlap[p][g];
  }
  const auto assignment = max_profit_assignment(square);
  ClusterMapping mapping;
  mapping.num_pred = num_pred;
  mapping.num_gt = num_gt;
  mapping.pred_to_gt.assign(num_pred, -1);
  for (std::size_t p = 0; p < num_pred; ++p) {
    if (assignment[p] < num_gt) {
      mapping.pred_to_gt[p] = static_cast<int>(assignment[p]);
      mapping.total_overlap += overlap[p][assignment[p]];
    }
  }
  return mapping;
}

std::vector<LabelSeq> apply_mapping(const std::vector<LabelSeq>& pred, const ClusterMapping& mapping) {
  std::vector<LabelSeq> out(pred.size());
  for (std::size_t s = 0; s < pred.size(); ++s) {
    out[s].reserve(pred[s].size());
    for (int p : pred[s]) out[s].push_back(mapping.map(p));
  }
  return out;
}

double mof(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt, const EvalOptions& options) {
  check_aligned(pred, gt);
  std::size_t correct = 0, total = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    for (std::size_t t = 0; t < pred[s].size(); ++t) {
      if (options.exclude_labels.count(gt[s][t])) continue;
      ++total;
      correct += pred[s][t] == gt[s][t];
    }
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::size_t levenshtein(std::span<const int> a, std::span<const int> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double edit_score(std::span<const int> pred, std::span<const int> gt, const EvalOptions& options) {
  std::vector<int> a, b;
  for (const auto& s : kept_segments(pred, options)) a.push_back(s.label);
  for (const auto& s : kept_segments(gt, options)) b.push_back(s.label);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 100.0;
  const double dist = static_cast<double>(levenshtein(a, b));
  return std::max(0.0, 1.0 - dist / static_cast<double>(longest)) * 100.0;
}

double edit_score(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                  const EvalOptions& options) {
  check_aligned(pred, gt);
  if (pred.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < pred.size(); ++s) total += edit_score(pred[s], gt[s], options);
  return total / static_cast<double>(pred.size());
}

double F1Counts::f1() const {
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 0.0 : 100.0 * 2.0 * static_cast<double>(tp) / denom;
}

F1Counts f1_counts(const std::vector<Segment>& pred, const std::vector<Segment>& gt, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("f1: tau must lie in (0, 1]");
  F1Counts counts;
  std::vector<bool> claimed(gt.size(), false);
  for (const auto& p : pred) {
    double best = -1.0;
    std::size_t best_idx = gt.size();
    for (std::size_t i = 0; i < gt.size(); ++i) {
      double iou = 0.0;
      if (gt[i].label == p.label) {
        const auto lo = std::max(p.start, gt[i].start);
        const auto hi = std::min(p.end, gt[i].end);
        const double inter = hi > lo ? static_cast<double>(hi - lo) : 0.0;
        const double uni = static_cast<double>((p.end - p.start) + (gt[i].end - gt[i].start)) - inter;
        iou = uni > 0.0 ? inter / uni : 0.0;
      }
      if (iou > best) {
        best = iou;
        best_idx = i;
      }
    }
    if (best_idx < gt.size() && best >= tau && !claimed[best_idx]) {
      ++counts.tp;
      claimed[best_idx] = true;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = static_cast<std::size_t>(std::count(claimed.begin(), claimed.end(), false));
  return counts;
}

F1Counts f1_counts(std::span<const int> pred, std::span<const int> gt, double tau,
                   const EvalOptions& options) {
  return f1_counts(kept_segments(pred, options), kept_segments(gt, options), tau);
}

double f1_at(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt, double tau,
             const EvalOptions& options) {
  check_aligned(pred, gt);
  F1Counts total;
  for (std::size_t s = 0; s < pred.size(); ++s) total += f1_counts(pred[s], gt[s], tau, options);
  return total.f1();
}

double silhouette(std::span<const float> points, std::size_t dim, std::span<const int> labels,
                  std::size_t cap, std::uint64_t seed) {
  if (dim == 0 || points.size() != labels.size() * dim) {
    throw InvalidArgument("silhouette: points must hold labels.size() rows of length dim");
  }
  std::vector<std::size_t> chosen(labels.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (cap > 0 && chosen.size() > cap) {
    std::mt19937_64 rng(seed);
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(cap);
    std::sort(chosen.begin(), chosen.end());
  }
  // Compact the label ids that survive subsampling.
  std::vector<int> ids;
  for (auto i : chosen) ids.push_back(labels[i]);
  std::vector<int> distinct = ids;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) {
    throw InvalidArgument("silhouette: needs at least two non-empty clusters, found " +
                          std::to_string(distinct.size()));
  }
  std::vector<std::uint32_t> compact(chosen.size());
  std::vector<float> packed(chosen.size() * dim);
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    compact[r] = static_cast<std::uint32_t>(
        std::lower_bound(distinct.begin(), distinct.end(), ids[r]) - distinct.begin());
    std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(chosen[r] * dim), dim,
                packed.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  std::vector<double> s(chosen.size());
  kernels::silhouette_samples<float>(packed, dim, compact, distinct.size(), s);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

std::string to_string(EvalScope scope) { return scope == EvalScope::global ? "global" : "local"; }

EvalScope parse_scope(const std::string& s) {
  if (s == "global") return EvalScope::global;
  if (s == "local") return EvalScope::local;
  throw InvalidArgument("unknown evaluation scope '" + s + "' (expected global|local)");
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["mof"] = mof;
  j["edit"] = edit;
  j["f1_10"] = f1_10;
  j["f1_25"] = f1_25;
  j["f1_50"] = f1_50;
  j["scope"] = to_string(scope);
  if (scope == EvalScope::global && mappings.size() == 1) {
    j["mapping"] = mappings.front().pred_to_gt;
  } else {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& m : mappings) per.push_back(m.pred_to_gt);
    j["mapping"] = per;
  }
  return j;
}

bool MetricsReport::operator==(const MetricsReport& o) const {
  if (mappings.size() != o.mappings.size()) return false;
  for (std::size_t i = 0; i < mappings.size(); ++i) {
    if (mappings[i].pred_to_gt != o.mappings[i].pred_to_gt) return false;
  }
  return mof == o.mof && edit == o.edit && f1_10 == o.f1_10 && f1_25 == o.f1_25 &&
         f1_50 == o.f1_50 && scope == o.scope && class_frames == o.class_frames &&
         avg_actions_per_sequence == o.avg_actions_per_sequence;
}

namespace {

std::vector<std::size_t> class_frame_counts(const std::vector<LabelSeq>& gt, std::size_t num_gt,
                                            const EvalOptions& options) {
  std::vector<std::size_t> counts(num_gt, 0);
  for (const auto& seq : gt) {
    for (int g : seq) {
      if (!options.exclude_labels.count(g) && g >= 0 && static_cast<std::size_t>(g) < num_gt) ++counts[g];
    }
  }
  return counts;
}

}  // namespace

MetricsReport evaluate_global(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                              std::size_t num_pred, std::size_t num_gt, const EvalOptions& options) {
  MetricsReport report;
  report.scope = EvalScope::global;
  const ClusterMapping mapping = hungarian_match(pred, gt, num_pred, num_gt, options);
  const auto mapped = apply_mapping(pred, mapping);
  report.mof = mof(mapped, gt, options);
  report.edit = edit_score(mapped, gt, options);
  report.f1_10 = f1_at(mapped, gt, 0.10, options);
  report.f1_25 = f1_at(mapped, gt, 0.25, options);
  report.f1_50 = f1_at(mapped, gt, 0.50, options);
  report.mappings.push_back(mapping);
  report.class_frames = class_frame_counts(gt, num_gt, options);
  return report;
}

MetricsReport evaluate_local(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                             std::size_t num_pred, std::size_t num_gt, const EvalOptions& options) {
  check_aligned(pred, gt);
  if (pred.empty()) throw InvalidArgument("metrics: no sequences to evaluate");
  MetricsReport report;
  report.scope = EvalScope::local;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const std::vector<LabelSeq> p{pred[s]}, g{gt[s]};
    const MetricsReport one = evaluate_global(p, g, num_pred, num_gt, options);
    report.mof += one.mof;
    report.edit += one.edit;
    report.f1_10 += one.f1_10;
    report.f1_25 += one.f1_25;
    report.f1_50 += one.f1_50;
    report.mappings.push_back(one.mappings.front());
  }
  const double n = static_cast<double>(pred.size());
  report.mof /= n;
  report.edit /= n;
  report.f1_10 /= n;
  report.f1_25 /= n;
  report.f1_50 /= n;
  report.class_frames = class_frame_counts(gt, num_gt, options);
  report.avg_actions_per_sequence = average_actions_per_sequence(gt);
  return report;
}

MetricsReport evaluate(EvalScope scope, const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                       std::size_t num_pred, std::size_t num_gt, const EvalOptions& options) {
  return scope == EvalScope::global ? evaluate_global(pred, gt, num_pred, num_gt, options)
                                    : evaluate_local(pred, gt, num_pred, num_gt, options);
}

double average_actions_per_sequence(const std::vector<LabelSeq>& gt) {
  if (gt.empty()) return 0.0;
  double total = 0.0;
  for (const auto& seq : gt) {
    std::vector<int> distinct = seq;
    std::sort(distinct.begin(), distinct.end());
    total += static_cast<double>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  }
  return total / static_cast<double>(gt.size());
}

}  // namespace smq
