#pragma once

// Unsupervised segmentation evaluation: Hungarian cluster-to-class matching,
// MoF, edit score, segmental F1@tau and patch silhouette.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace smq {

using LabelSeq = std::vector<int>;

struct Segment {
  int label = 0;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
};

/// Maximal runs of equal labels.
std::vector<Segment> to_segments(std::span<const int> labels);

/// Row-to-column assignment maximising the summed profit of a square matrix
/// (Kuhn-Munkres, O(n^3)). Result[i] is the column of row i.
std::vector<std::size_t> max_profit_assignment(const std::vector<std::vector<long long>>& profit);

struct ClusterMapping {
  std::vector<int> pred_to_gt;  // -1 when the cluster is unmatched
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;
  long long total_overlap = 0;

  /// Unmatched clusters map to num_gt + cluster so they never equal a class.
  int map(int pred) const;
};

struct EvalOptions {
  std::set<int> exclude_labels;  // ground-truth classes ignored by every metric
};

/// Frame-overlap matrix [num_pred][num_gt] over all sequences.
std::vector<std::vector<long long>> overlap_matrix(const std::vector<LabelSeq>& pred,
                                                   const std::vector<LabelSeq>& gt,
                                                   std::size_t num_pred, std::size_t num_gt,
                                                   const EvalOptions& options = {});

ClusterMapping hungarian_match(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                               std::size_t num_pred, std::size_t num_gt,
                               const EvalOptions& options = {});

std::vector<LabelSeq> apply_mapping(const std::vector<LabelSeq>& pred, const ClusterMapping& mapping);

/// 100 * correct frames / evaluated frames; inputs already mapped.
double mof(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
           const EvalOptions& options = {});

std::size_t levenshtein(std::span<const int> a, std::span<const int> b);

/// Per-sequence edit score in percent.
double edit_score(std::span<const int> pred, std::span<const int> gt, const EvalOptions& options = {});
/// Mean of the per-sequence edit scores.
double edit_score(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                  const EvalOptions& options = {});

struct F1Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  F1Counts& operator+=(const F1Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  double f1() const;
};

/// Each predicted segment is compared with the same-class ground-truth
/// segment of highest IoU; it is a true positive when that IoU >= tau and the
/// ground-truth segment has not been claimed yet, otherwise a false positive.
F1Counts f1_counts(const std::vector<Segment>& pred, const std::vector<Segment>& gt, double tau);
F1Counts f1_counts(std::span<const int> pred, std::span<const int> gt, double tau,
                   const EvalOptions& options = {});
/// TP/FP/FN pooled over all sequences.
double f1_at(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt, double tau,
             const EvalOptions& options = {});

/// Mean silhouette of `points` (n x dim) under `labels`, on a seeded
/// subsample of at most `cap` points. Needs at least two non-empty clusters.
double silhouette(std::span<const float> points, std::size_t dim, std::span<const int> labels,
                  std::size_t cap = 5000, std::uint64_t seed = 0);

enum class EvalScope { global, local };

std::string to_string(EvalScope scope);
EvalScope parse_scope(const std::string& s);

struct MetricsReport {
  double mof = 0.0;
  double edit = 0.0;
  double f1_10 = 0.0;
  double f1_25 = 0.0;
  double f1_50 = 0.0;
  EvalScope scope = EvalScope::global;
  std::vector<ClusterMapping> mappings;  // one (global) or one per sequence (local)
  std::vector<std::size_t> class_frames; // ground-truth frames per class
  std::optional<double> avg_actions_per_sequence;

  nlohmann::json to_json() const;
  bool operator==(const MetricsReport&) const;
};

/// One Hungarian mapping for the whole dataset.
MetricsReport evaluate_global(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                              std::size_t num_pred, std::size_t num_gt, const EvalOptions& options = {});

/// Hungarian matching and metrics per sequence, then averaged.
MetricsReport evaluate_local(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& gt,
                             std::size_t num_pred, std::size_t num_gt, const EvalOptions& options = {});

MetricsReport evaluate(EvalScope scope, const std::vector<LabelSeq>& pred,
                       const std::vector<LabelSeq>& gt, std::size_t num_pred, std::size_t num_gt,
                       const EvalOptions& options = {});

/// Average number of distinct ground-truth classes per sequence.
double average_actions_per_sequence(const std::vector<LabelSeq>& gt);

}  // namespace smq
