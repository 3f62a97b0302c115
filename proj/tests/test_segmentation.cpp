#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "dawmr/affinity.hpp"
#include "dawmr/metrics.hpp"
#include "dawmr/segmentation.hpp"
#include "dawmr/synthetic.hpp"
#include "oracles.hpp"

using namespace dawmr;

namespace {

AffinityGraph random_affinity(const Dims& d, Rng& rng, int levels = 0) {
  AffinityGraph a(d, 3);
  for (float& v : a.storage())
    v = levels > 0 ? static_cast<float>(rng.below(static_cast<std::uint64_t>(levels))) / static_cast<float>(levels - 1)
                   : static_cast<float>(rng.uniform());
  return a;
}

// Random affinities with values in a few levels, plus labels from a random
// segmentation.
struct Instance {
  AffinityGraph pred;
  SegmentationVolume seg;
  LabelMask labels;
};

Instance random_instance(Rng& rng) {
  const Dims d{2 + rng.below(4), 2 + rng.below(4), 2 + rng.below(4)};
  Instance inst{random_affinity(d, rng, 7), oracle::random_segmentation(d, 2, rng), {}};
  inst.labels = affinities_from_segmentation(inst.seg).labels;
  return inst;
}

std::vector<double> quantile_oracle(const AffinityGraph& aff, std::size_t count) {
  std::vector<double> values;
  const Dims d = aff.dims();
  for (std::size_t i = 0; i < d.voxels(); ++i)
    for (int e = 0; e < 3; ++e) {
      const Coord v = oracle::coord_of(d, i);
      if (oracle::inside(d, oracle::step(v, e))) values.push_back(aff(v, static_cast<std::size_t>(e)));
    }
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(count - 1);
    const double q = values[static_cast<std::size_t>(std::llround(p * static_cast<double>(values.size() - 1)))];
    if (out.empty() || out.back() != q) out.push_back(q);
  }
  std::vector<double> kept;
  for (double t : out)
    if (t < values.back()) kept.push_back(t);
  return kept.empty() ? out : kept;
}

}  // namespace

TEST_CASE("segment_components") {
  const Dims d{4, 3, 2};
  CHECK(count_segments(segment_components(AffinityGraph(d, 3, 1.0f), 0.5)) == 1);
  const auto bg = segment_components(AffinityGraph(d, 3, 0.0f), 0.5);
  for (auto id : bg.storage()) CHECK(id == 0u);
  const auto strict = segment_components(AffinityGraph(d, 3, 1.0f), 1.0);
  for (auto id : strict.storage()) CHECK(id == 0u);

  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto aff = random_affinity(Dims{6, 6, 6}, rng, 2);
    const auto got = segment_components(aff, 0.5);
    const auto want = oracle::components(aff, 0.5);
    REQUIRE(got == want);
  }

  // First-voxel scan order numbering.
  AffinityGraph line(Dims{5, 1, 1}, 3, 0.0f);
  line(3, 0, 0, 0) = 1.0f;
  line(0, 0, 0, 0) = 1.0f;
  const auto s = segment_components(line, 0.5);
  CHECK(s.storage() == std::vector<std::uint32_t>{1, 1, 0, 2, 2});
}

TEST_CASE("segment count grows with the threshold") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto aff = random_affinity(Dims{6, 5, 4}, rng);
    std::size_t prev_edges = SIZE_MAX;
    for (double th = 0.0; th < 1.0; th += 0.05) {
      std::size_t edges = 0;
      for (float v : aff.storage()) edges += v > th;
      CHECK(edges <= prev_edges);
      prev_edges = edges;
    }
    // Components plus isolated voxels never decrease as edges are removed.
    std::size_t prev = 0;
    for (double th = 0.0; th < 1.0; th += 0.05) {
      const auto seg = segment_components(aff, th);
      std::size_t pieces = count_segments(seg);
      for (auto id : seg.storage()) pieces += id == 0;
      CHECK(pieces >= prev);
      prev = pieces;
    }
    for (double th : {0.1, 0.5, 0.9})
      CHECK(count_segments(segment_components(aff, th)) == count_segments(oracle::components(aff, th)));
  }
}

TEST_CASE("watershed grow-out") {
  // Line of five voxels with edge affinities .9 .2 .8 .9 and seeds at the ends.
  AffinityGraph aff(Dims{1, 1, 5}, 3, 0.0f);
  const float edges[4] = {0.9f, 0.2f, 0.8f, 0.9f};
  for (std::size_t z = 0; z < 4; ++z) aff(0, 0, z, 2) = edges[z];
  SegmentationVolume seeds(Dims{1, 1, 5}, 1, 0u);
  seeds(0, 0, 0) = 1;
  seeds(0, 0, 4) = 2;
  const auto grown = watershed_grow(seeds, aff);
  CHECK(grown.storage() == std::vector<std::uint32_t>{1, 1, 2, 2, 2});

  SegmentationVolume one(Dims{3, 3, 3}, 1, 0u);
  one(1, 1, 1) = 5;
  const auto flooded = watershed_grow(one, AffinityGraph(Dims{3, 3, 3}, 3, 0.3f));
  for (auto id : flooded.storage()) CHECK(id == 5u);

  const SegmentationVolume none(Dims{3, 3, 3}, 1, 0u);
  CHECK(watershed_grow(none, AffinityGraph(Dims{3, 3, 3}, 3, 0.3f)) == none);

  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_affinity(Dims{5, 4, 3}, rng, 5);
    SegmentationVolume s(Dims{5, 4, 3}, 1, 0u);
    for (int k = 0; k < 3; ++k) s.storage()[rng.below(s.storage().size())] = static_cast<std::uint32_t>(k + 1);
    const auto got = watershed_grow(s, a);
    REQUIRE(got == oracle::watershed(s, a));
    for (auto id : got.storage()) CHECK(id != 0u);
    CHECK(count_segments(got) == count_segments(s));
    CHECK(watershed_grow(got, a) == got);
  }
}

TEST_CASE("rand index") {
  Rng rng(4);
  const auto a = oracle::random_segmentation(Dims{4, 4, 4}, 3, rng);
  CHECK(rand_index(a, a) == 1.0);
  CHECK(rand_index(a, a, RandMode::all_pairs) == 1.0);

  SegmentationVolume singletons(Dims{4, 1, 1}, 1, std::vector<std::uint32_t>{1, 2, 3, 4});
  SegmentationVolume merged(Dims{4, 1, 1}, 1, 9u);
  CHECK(rand_index(singletons, merged) == 0.0);

  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::random_segmentation(Dims{4, 4, 4}, 3, rng);
    const auto y = oracle::random_segmentation(Dims{4, 4, 4}, 4, rng);
    CHECK(rand_index(x, y) == oracle::rand_pairs(x, y, true));
    CHECK(rand_index(x, y, RandMode::all_pairs) == oracle::rand_pairs(x, y, false));
    CHECK(rand_index(x, y, RandMode::all_pairs) == rand_index(y, x, RandMode::all_pairs));
    // Id permutation.
    auto z = y;
    for (auto& id : z.storage()) id = id == 0 ? 0 : 100 - id;
    CHECK(rand_index(x, z) == rand_index(x, y));
  }

  CHECK_THROWS_AS(rand_index(SegmentationVolume(Dims{2, 1, 1}, 1, std::vector<std::uint32_t>{0, 1}),
                             SegmentationVolume(Dims{2, 1, 1}, 1, 1u)),
                  ValidationError);
}

TEST_CASE("balanced accuracy and AUC") {
  Rng rng(5);
  const auto seg = oracle::random_segmentation(Dims{5, 5, 5}, 2, rng);
  const auto truth = affinities_from_segmentation(seg);
  const auto perfect = balanced_accuracy(truth.affinity, truth.labels);
  CHECK(perfect.mean == 1.0);
  CHECK_FALSE(perfect.warning());
  CHECK(balanced_accuracy(AffinityGraph(seg.dims(), 3, 1.0f), truth.labels).mean == 0.5);
  CHECK(auc_edge(truth.affinity, truth.labels).mean == 1.0);
  CHECK(auc_edge(AffinityGraph(seg.dims(), 3, 0.3f), truth.labels).mean == 0.5);

  for (int t = 0; t < 100; ++t) {
    const auto inst = random_instance(rng);
    const auto got = balanced_accuracy(inst.pred, inst.labels);
    const auto c = oracle::confusion(inst.pred, inst.labels, 0.5);
    double sum = 0;
    int defined = 0;
    for (std::size_t e = 0; e < 3; ++e) {
      const bool ok = c.tp[e] + c.fn[e] > 0 && c.tn[e] + c.fp[e] > 0;
      REQUIRE(got.defined[e] == ok);
      if (!ok) continue;
      const double ba = 0.5 * static_cast<double>(c.tp[e]) / static_cast<double>(c.tp[e] + c.fn[e]) +
                        0.5 * static_cast<double>(c.tn[e]) / static_cast<double>(c.tn[e] + c.fp[e]);
      CHECK(got.direction[e] == ba);
      sum += ba;
      ++defined;
    }
    if (defined > 0) CHECK(got.mean == doctest::Approx(sum / defined).epsilon(1e-15));

    const auto auc = auc_edge(inst.pred, inst.labels);
    for (std::size_t e = 0; e < 3; ++e) {
      std::vector<float> pos, neg;
      for (std::size_t i = 0; i < inst.pred.dims().voxels(); ++i) {
        const int l = inst.labels.storage()[i * 3 + e];
        if (l == 1) pos.push_back(inst.pred.storage()[i * 3 + e]);
        if (l == -1) neg.push_back(inst.pred.storage()[i * 3 + e]);
      }
      REQUIRE(auc.defined[e] == (!pos.empty() && !neg.empty()));
      if (auc.defined[e]) CHECK(std::abs(auc.direction[e] - oracle::auc_pairs(pos, neg)) <= 1e-12);
    }
  }

  // Twenty scored edges in one direction.
  AffinityGraph p(Dims{21, 1, 1}, 3, 0.0f);
  LabelMask l(Dims{21, 1, 1}, 3, 0);
  std::vector<float> pos, neg;
  for (std::size_t x = 0; x < 20; ++x) {
    const float s = static_cast<float>(rng.below(6)) / 5.0f;
    p(x, 0, 0, 0) = s;
    l(x, 0, 0, 0) = x % 3 == 0 ? 1 : -1;
    (x % 3 == 0 ? pos : neg).push_back(s);
  }
  const auto one = auc_edge(p, l);
  CHECK(one.defined[0]);
  CHECK_FALSE(one.defined[1]);
  CHECK(one.warning());
  CHECK(std::abs(one.mean - oracle::auc_pairs(pos, neg)) <= 1e-12);
}

TEST_CASE("quantile thresholds") {
  Rng rng(6);
  const auto ten = random_affinity(Dims{6, 6, 6}, rng, 10);
  const auto th = quantile_thresholds(ten, 1000);
  CHECK(th.size() <= 10);
  CHECK(std::is_sorted(th.begin(), th.end()));
  CHECK(std::adjacent_find(th.begin(), th.end()) == th.end());
  for (int t = 0; t < 20; ++t) {
    const auto a = random_affinity(Dims{4, 3, 5}, rng, t % 2 ? 0 : 4);
    for (std::size_t count : {2u, 7u, 100u, 1000u}) CHECK(quantile_thresholds(a, count) == quantile_oracle(a, count));
  }
  CHECK(quantile_thresholds(AffinityGraph(Dims{3, 3, 3}, 3, 0.5f)) == std::vector<double>{0.5});
}

TEST_CASE("rand curve") {
  SyntheticParams p;
  p.dims = {16, 16, 16};
  p.num_seeds = 5;
  p.seed = 3;
  const auto s = generate_synthetic(p);
  const auto truth = affinities_from_segmentation(s.truth);
  const auto curve = rand_curve(truth.affinity, s.truth, quantile_thresholds(truth.affinity));
  CHECK(curve.max_ri == 1.0);
  for (double r : curve.rand) CHECK(r == 1.0);
  const auto mid = rand_curve(truth.affinity, s.truth, {0.1, 0.5, 0.9});
  CHECK(mid.auc_ri == 1.0);

  const AffinityGraph flat(p.dims, 3, 0.5f);
  const std::vector<double> ths{0.2, 0.5, 0.7};
  const auto step = rand_curve(flat, s.truth, ths);
  REQUIRE(step.rand.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto seeds = oracle::components(flat, ths[i]);
    const auto grown = oracle::watershed(seeds, flat);
    CHECK(step.rand[i] == oracle::rand_pairs(s.truth, grown, true));
    CHECK(step.clusters[i] == count_segments(seeds));
  }
  CHECK(step.rand[1] == step.rand[2]);
  CHECK(step.auc_ri == doctest::Approx((step.rand[0] + step.rand[1] + step.rand[2]) / 3));
  CHECK(step.max_ri == *std::max_element(step.rand.begin(), step.rand.end()));

  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_affinity(Dims{5, 5, 4}, rng);
    const auto seg = oracle::random_segmentation(Dims{5, 5, 4}, 3, rng);
    const auto sweep = quantile_thresholds(a, 9);
    const auto c = rand_curve(a, seg, sweep, RandMode::all_pairs);
    for (std::size_t i = 0; i < sweep.size(); ++i)
      CHECK(c.rand[i] == oracle::rand_pairs(seg, oracle::watershed(oracle::components(a, sweep[i]), a), false));
  }
}

TEST_CASE("evaluation report") {
  SyntheticParams p;
  p.dims = {12, 12, 12};
  p.num_seeds = 4;
  p.seed = 8;
  const auto s = generate_synthetic(p);
  const auto truth = affinities_from_segmentation(s.truth);
  const auto report = evaluate_prediction(truth.affinity, truth.affinity.box(), s.truth);
  CHECK(report.bal_acc.mean == 1.0);
  CHECK(report.auc.mean == 1.0);
  CHECK(report.curve.max_ri == 1.0);
  const auto text = format_metrics(report);
  for (const char* key : {"bal_acc_x=1\n", "bal_acc=1\n", "bal_acc_warning=0\n", "auc_edge_z=1\n", "max_ri=1\n",
                          "auc_ri=", "thresholds="})
    CHECK(text.find(key) != std::string::npos);
  CHECK(format_rand_table(report.curve).rfind("threshold clusters rand\n", 0) == 0);

  // Cropping regenerates labels inside the box.
  const Box inner{{2, 2, 2}, {10, 9, 8}};
  const auto cropped = evaluate_prediction(truth.affinity, inner, s.truth);
  const auto ct = affinities_from_segmentation(crop(s.truth, inner));
  CHECK(cropped.bal_acc.mean == balanced_accuracy(crop(truth.affinity, inner), ct.labels).mean);

  EvaluationOptions quick;
  quick.rand = false;
  CHECK(evaluate_prediction(truth.affinity, inner, s.truth, quick).curve.thresholds.empty());
}
