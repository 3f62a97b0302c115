#include "dawmr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "dawmr/affinity.hpp"
#include "dawmr/segmentation.hpp"

namespace dawmr {

namespace {

void check_aligned(const AffinityGraph& pred, const LabelMask& truth) {
  require(pred.dims() == truth.dims() && pred.channels() == 3 && truth.channels() == 3,
          "prediction and labels must be aligned 3-channel volumes");
}

void finish(DirectionalScore& s) {
  double sum = 0.0;
  int n = 0;
  for (int d = 0; d < 3; ++d)
    if (s.defined[static_cast<std::size_t>(d)]) {
      sum += s.direction[static_cast<std::size_t>(d)];
      ++n;
    }
  s.mean = n > 0 ? sum / n : 0.0;
}

std::uint64_t pairs(std::uint64_t n) { return n * (n - 1) / 2; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DirectionalScore balanced_accuracy(const AffinityGraph& pred, const LabelMask& truth, double threshold) {
  check_aligned(pred, truth);
  std::array<std::uint64_t, 3> pos{}, neg{}, tp{}, tn{};
  const auto& p = pred.storage();
  const auto& t = truth.storage();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t c = i % 3;
    const bool predicted = p[i] > threshold;
    if (t[i] > 0) {
      ++pos[c];
      tp[c] += predicted;
    } else if (t[i] < 0) {
      ++neg[c];
      tn[c] += !predicted;
    }
  }
  DirectionalScore s;
  for (std::size_t c = 0; c < 3; ++c) {
    s.defined[c] = pos[c] > 0 && neg[c] > 0;
    if (s.defined[c])
      s.direction[c] = 0.5 * static_cast<double>(tp[c]) / static_cast<double>(pos[c]) +
                       0.5 * static_cast<double>(tn[c]) / static_cast<double>(neg[c]);
  }
  finish(s);
  return s;
}

DirectionalScore auc_edge(const AffinityGraph& pred, const LabelMask& truth) {
  check_aligned(pred, truth);
  DirectionalScore s;
  const auto& p = pred.storage();
  const auto& t = truth.storage();
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<std::pair<float, bool>> edges;
    for (std::size_t i = c; i < t.size(); i += 3)
      if (t[i] != 0) edges.emplace_back(p[i], t[i] > 0);
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    // Wins counted in half units so ties stay exact.
    std::uint64_t neg_below = 0, half_wins = 0, npos = 0, nneg = 0;
    for (std::size_t i = 0; i < edges.size();) {
      std::size_t j = i;
      std::uint64_t gp = 0, gn = 0;
      while (j < edges.size() && edges[j].first == edges[i].first) {
        (edges[j].second ? gp : gn) += 1;
        ++j;
      }
      half_wins += gp * (2 * neg_below + gn);
      neg_below += gn;
      npos += gp;
      nneg += gn;
      i = j;
    }
    s.defined[c] = npos > 0 && nneg > 0;
    if (s.defined[c])
      s.direction[c] = static_cast<double>(half_wins) / (2.0 * static_cast<double>(npos) * static_cast<double>(nneg));
  }
  finish(s);
  return s;
}

double rand_index(const SegmentationVolume& a, const SegmentationVolume& b, RandMode mode) {
  require(a.dims() == b.dims() && a.channels() == 1 && b.channels() == 1, "segmentations are not aligned");
  std::unordered_map<std::uint64_t, std::uint64_t> joint;
  std::unordered_map<std::uint32_t, std::uint64_t> rows, cols;
  std::uint64_t n = 0;
  const auto& av = a.storage();
  const auto& bv = b.storage();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (mode == RandMode::foreground_restricted && av[i] == 0) continue;
    ++n;
    ++joint[(std::uint64_t{av[i]} << 32) | bv[i]];
    ++rows[av[i]];
    ++cols[bv[i]];
  }
  require(n >= 2, "rand index needs at least two voxels in its pair universe");
  std::uint64_t same_both = 0, same_a = 0, same_b = 0;
  for (const auto& [k, v] : joint) same_both += pairs(v);
  for (const auto& [k, v] : rows) same_a += pairs(v);
  for (const auto& [k, v] : cols) same_b += pairs(v);
  const std::uint64_t total = pairs(n);
  const std::uint64_t agree = total - same_a - same_b + 2 * same_both;
  return static_cast<double>(agree) / static_cast<double>(total);
}

std::vector<double> quantile_thresholds(const AffinityGraph& aff, std::size_t count) {
  require(aff.channels() == 3, "affinity graphs have 3 channels");
  require(count >= 2, "a threshold sweep needs at least two quantiles");
  const Dims d = aff.dims();
  std::vector<float> values;
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x)
        for (int e = 0; e < 3; ++e)
          if (edge_in_volume(d, {static_cast<std::int64_t>(x), static_cast<std::int64_t>(y),
                                 static_cast<std::int64_t>(z)}, e))
            values.push_back(aff(x, y, z, static_cast<std::size_t>(e)));
  require(!values.empty(), "affinity graph has no in-volume edges");
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  const double last = static_cast<double>(values.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const auto rank = static_cast<std::size_t>(std::llround(static_cast<double>(i) / static_cast<double>(count - 1) * last));
    const double v = values[rank];
    if (out.empty() || v != out.back()) out.push_back(v);
  }
  const double top = values.back();
  if (out.size() > 1)
    out.erase(std::remove_if(out.begin(), out.end(), [&](double v) { return v >= top; }), out.end());
  return out;
}

RandCurve rand_curve(const AffinityGraph& pred, const SegmentationVolume& truth, const std::vector<double>& thresholds,
                     RandMode mode) {
  require(!thresholds.empty(), "threshold sweep is empty");
  require(pred.dims() == truth.dims(), "prediction and truth are not aligned");
  RandCurve curve;
  curve.thresholds = thresholds;
  curve.clusters.resize(thresholds.size());
  curve.rand.resize(thresholds.size());
  const auto n = static_cast<std::int64_t>(thresholds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const SegmentationVolume seeds = segment_components(pred, thresholds[k]);
    curve.clusters[k] = count_segments(seeds);
    curve.rand[k] = rand_index(truth, watershed_grow(seeds, pred), mode);
  }
  double sum = 0.0;
  for (double r : curve.rand) {
    sum += r;
    curve.max_ri = std::max(curve.max_ri, r);
  }
  curve.auc_ri = sum / static_cast<double>(curve.rand.size());
  return curve;
}

MetricsReport evaluate_prediction(const AffinityGraph& pred, const Box& valid, const SegmentationVolume& truth,
                                  const EvaluationOptions& options) {
  require(pred.dims() == truth.dims(), "prediction and truth are not aligned");
  const AffinityGraph p = crop(pred, valid);
  const SegmentationVolume t = crop(truth, valid);
  const LabelMask labels = affinities_from_segmentation(t).labels;
  MetricsReport r;
  r.bal_acc = balanced_accuracy(p, labels);
  r.auc = auc_edge(p, labels);
  if (options.rand) r.curve = rand_curve(p, t, quantile_thresholds(p, options.quantiles), options.mode);
  return r;
}

std::string format_metrics(const MetricsReport& r) {
  std::ostringstream out;
  const char* axis = "xyz";
  auto emit = [&](const std::string& name, const DirectionalScore& s) {
    for (std::size_t c = 0; c < 3; ++c)
      out << name << '_' << axis[c] << '=' << (s.defined[c] ? fmt(s.direction[c]) : "undefined") << '\n';
    out << name << '=' << fmt(s.mean) << '\n';
    out << name << "_warning=" << (s.warning() ? 1 : 0) << '\n';
  };
  emit("bal_acc", r.bal_acc);
  emit("auc_edge", r.auc);
  out << "thresholds=" << r.curve.thresholds.size() << '\n';
  out << "auc_ri=" << fmt(r.curve.auc_ri) << '\n';
  out << "max_ri=" << fmt(r.curve.max_ri) << '\n';
  return out.str();
}

std::string format_rand_table(const RandCurve& curve) {
  std::ostringstream out;
  out << "threshold clusters rand\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
    out << fmt(curve.thresholds[i]) << ' ' << curve.clusters[i] << ' ' << fmt(curve.rand[i]) << '\n';
  return out.str();
}

}  // namespace dawmr
