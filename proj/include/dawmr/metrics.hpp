#pragma once

#include <array>
#include <string>
#include <vector>

#include "dawmr/volume.hpp"

namespace dawmr {

// A score per edge direction plus their mean. A direction lacking positive
// or negative edges is undefined and left out of the mean.
struct DirectionalScore {
  std::array<double, 3> direction{0.0, 0.0, 0.0};
  std::array<bool, 3> defined{false, false, false};
  double mean = 0.0;

  // True when some direction is undefined.
  bool warning() const { return !(defined[0] && defined[1] && defined[2]); }
};

// 0.5 * (accuracy on positive edges) + 0.5 * (accuracy on negative edges),
// with an edge predicted positive when its affinity exceeds `threshold`.
// Only edges with a known label count.
DirectionalScore balanced_accuracy(const AffinityGraph& pred, const LabelMask& truth, double threshold = 0.5);

// P(score_pos > score_neg) + 0.5 P(score_pos == score_neg) over labeled edges.
DirectionalScore auc_edge(const AffinityGraph& pred, const LabelMask& truth);

enum class RandMode { foreground_restricted, all_pairs };

// Fraction of voxel pairs on which the segmentations agree. In
// foreground_restricted mode only voxels with a nonzero id in `a` count.
double rand_index(const SegmentationVolume& a, const SegmentationVolume& b,
                  RandMode mode = RandMode::foreground_restricted);

// Nearest-rank quantiles at i / (count - 1), i = 0..count-1, of the in-volume
// affinity values, deduplicated. Thresholds at or above the largest value
// are dropped unless nothing else remains.
std::vector<double> quantile_thresholds(const AffinityGraph& aff, std::size_t count = 1000);

struct RandCurve {
  std::vector<double> thresholds;
  std::vector<std::size_t> clusters;  // components before grow-out
  std::vector<double> rand;
  double auc_ri = 0.0;
  double max_ri = 0.0;
};

// Per threshold: segment_components, watershed_grow, rand_index vs truth.
RandCurve rand_curve(const AffinityGraph& pred, const SegmentationVolume& truth, const std::vector<double>& thresholds,
                     RandMode mode = RandMode::foreground_restricted);

struct MetricsReport {
  DirectionalScore bal_acc;
  DirectionalScore auc;
  RandCurve curve;
};

struct EvaluationOptions {
  std::size_t quantiles = 1000;
  RandMode mode = RandMode::foreground_restricted;
  bool rand = true;
};

// Scores `pred` against `truth` inside `valid`: both are cropped to the box
// and edge labels are regenerated from the cropped segmentation.
MetricsReport evaluate_prediction(const AffinityGraph& pred, const Box& valid, const SegmentationVolume& truth,
                                  const EvaluationOptions& options = {});

// Flat "key=value" lines.
std::string format_metrics(const MetricsReport& report);
// "threshold clusters rand" rows with a header line.
std::string format_rand_table(const RandCurve& curve);

}  // namespace dawmr
