#include <filesystem>
#include <set>

#include "doctest.h"
#include "dawmr/affinity.hpp"
#include "dawmr/bundle.hpp"
#include "dawmr/led.hpp"
#include "dawmr/recursive.hpp"
#include "dawmr/shard.hpp"
#include "dawmr/synthetic.hpp"
#include "dawmr/transform.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dawmr;

namespace {

IterationConfig small_config() {
  IterationConfig c;
  c.neighborhood = {3, 3, 3};
  c.scales = {1};
  c.dict_size = 4;
  c.dict_patches = 400;
  c.dict_epochs = 3;
  c.subsample_fraction = 0.2;
  c.normalizer_sample = 1000;
  c.train.hidden = {8};
  c.train.updates = 100;
  c.train.batch_size = 10;
  c.shard_count = 3;
  c.seed = 5;
  return c;
}

std::vector<TrainingVolume> small_volumes(std::size_t count = 2, std::size_t side = 20) {
  std::vector<TrainingVolume> out;
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticParams p;
    p.dims = {side, side, side};
    p.num_seeds = 5;
    p.noise_sigma = 10;
    p.blur_sigma = 1;
    p.seed = 40 + i;
    auto s = generate_synthetic(p);
    out.push_back(make_training_volume(std::move(s.image), std::move(s.truth)));
  }
  return out;
}

bool same_model(const IterationModel& a, const IterationModel& b) {
  return a.index == b.index && a.scaling == b.scaling && a.extractor.spec() == b.extractor.spec() &&
         a.extractor.dictionaries() == b.extractor.dictionaries() && a.normalizer == b.normalizer && a.mlp == b.mlp;
}

bool same_model(const DawmrModel& a, const DawmrModel& b) {
  if (a.iterations.size() != b.iterations.size() || a.led_masks != b.led_masks) return false;
  for (std::size_t i = 0; i < a.iterations.size(); ++i)
    if (!same_model(a.iterations[i], b.iterations[i])) return false;
  return true;
}

Coord random_in(const Box& b, Rng& rng) {
  Coord c;
  for (int a = 0; a < 3; ++a) c[a] = b.lo[a] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(b.extent(a))));
  return c;
}

}  // namespace

TEST_CASE("iteration specs") {
  IterationConfig c;
  const auto one = spec_for_iteration(c, 1);
  REQUIRE(one.groups.size() == 1);
  CHECK(one.groups[0].dict_size == 1000);
  CHECK(one.scales == std::vector<int>{1, 2});
  CHECK(representation_dims(one) == 8000);
  CHECK(field_of_view(one) == std::array<std::int64_t, 3>{18, 18, 18});
  CHECK(c.train.hidden == std::vector<std::size_t>{200});
  CHECK(c.train.dropout_hidden == 0.5);

  const auto two = spec_for_iteration(c, 2);
  REQUIRE(two.groups.size() == 2);
  CHECK(two.groups[0] == ChannelGroup{InputGroup::image, 1, 500});
  CHECK(two.groups[1] == ChannelGroup{InputGroup::affinity, 3, 500});
  CHECK(representation_dims(two) == 8000);
}

TEST_CASE("feature shards") {
  Rng rng(1);
  const auto spec = fixtures::ss_fv_spec(3);
  const auto ex = fixtures::random_extractor(spec, rng);
  const auto image = fixtures::random_volume(Dims{24, 20, 18}, 1, rng);
  const ScaledInputs inputs(spec, {&image, nullptr});
  const Box region = support_region(spec, image.dims());
  std::vector<LabeledLocation> locs;
  std::set<std::int64_t> used;
  while (locs.size() < 1000) {
    const Coord c = random_in(region, rng);
    if (!used.insert((c.z * 100 + c.y) * 100 + c.x).second) continue;
    locs.push_back({c, {static_cast<std::int8_t>(rng.below(3)), 1, -1}});
  }
  for (auto& l : locs) l.labels[0] = static_cast<std::int8_t>(l.labels[0] - 1);

  const auto seven = precompute_features(ex, inputs, locs, 7, 3);
  REQUIRE(seven.size() == 7);
  std::size_t lo = SIZE_MAX, hi = 0, total = 0;
  for (const auto& s : seven) {
    lo = std::min(lo, s.size());
    hi = std::max(hi, s.size());
    total += s.size();
    CHECK(s.d == ex.dims());
  }
  CHECK(hi - lo <= 1);
  CHECK(total == 1000);

  const auto single = precompute_features(ex, inputs, locs, 1, 1);
  CHECK(merge_shards(seven) == single[0]);
  CHECK(precompute_features(ex, inputs, locs, 7, 1) == seven);
  for (std::size_t i = 0; i < single[0].size(); ++i) {
    const auto& r = single[0].records[i];
    const auto want = ex.extract_reference(inputs, r.coord);
    CHECK(std::equal(want.begin(), want.end(), single[0].row(i).begin()));
  }

  TempDir dir("shard");
  write_shard(seven[2], dir / "s.dwfs");
  CHECK(read_shard(dir / "s.dwfs") == seven[2]);
  CHECK(shard_record_bytes(ex.dims()) == 12 + 3 + 1 + 4 * ex.dims());
  CHECK(file_bytes(dir / "s.dwfs").size() == kShardHeaderBytes + seven[2].size() * shard_record_bytes(ex.dims()));
  auto bytes = file_bytes(dir / "s.dwfs");
  bytes[kShardHeaderBytes + 12] = 5;
  write_bytes(dir / "bad.dwfs", bytes);
  CHECK_THROWS_AS(read_shard(dir / "bad.dwfs"), FormatError);
  bytes = file_bytes(dir / "s.dwfs");
  bytes[0] = 'x';
  write_bytes(dir / "magic.dwfs", bytes);
  CHECK_THROWS_AS(read_shard(dir / "magic.dwfs"), FormatError);

  std::vector<LabeledLocation> edge{{{0, 0, 0}, {1, 1, 1}}};
  CHECK_THROWS_AS(precompute_features(ex, inputs, edge, 1), ValidationError);
}

TEST_CASE("LED masks") {
  Rng rng(2);
  const auto seg = oracle::random_segmentation(Dims{12, 12, 12}, 1, rng);
  const auto truth = affinities_from_segmentation(seg);
  const auto none = compute_led_mask(truth.affinity, truth.labels);
  for (auto v : none.storage()) CHECK(v == 0);

  AffinityGraph inverted = truth.affinity;
  for (float& v : inverted.storage()) v = 1.0f - v;
  const auto all = compute_led_mask(inverted, truth.labels);
  for (auto v : all.storage()) CHECK(v == 1);

  // A 4^3 block of errors planted in a correct prediction.
  AffinityGraph planted = truth.affinity;
  for (std::size_t z = 4; z < 8; ++z)
    for (std::size_t y = 5; y < 9; ++y)
      for (std::size_t x = 3; x < 7; ++x)
        for (std::size_t c = 0; c < 3; ++c) planted(x, y, z, c) = 1.0f - planted(x, y, z, c);
  const auto mask = compute_led_mask(planted, truth.labels);
  CHECK(mask == oracle::led_recount(planted, truth.labels, {5, 5, 5}, 0.5));
  std::size_t set = 0;
  for (auto v : mask.storage()) set += v;
  CHECK(set > 0);
  CHECK(set < 12 * 12 * 12);

  for (int t = 0; t < 30; ++t) {
    const Dims d{3 + rng.below(6), 3 + rng.below(6), 3 + rng.below(6)};
    const auto s = oracle::random_segmentation(d, 2, rng);
    auto labels = affinities_from_segmentation(s).labels;
    for (auto& l : labels.storage())
      if (rng.uniform() < 0.2) l = 0;
    AffinityGraph p(d, 3);
    for (float& v : p.storage()) v = static_cast<float>(rng.uniform());
    const LedOptions opts{{3, 5, 1}, 0.4, 10};
    CHECK(compute_led_mask(p, labels, opts) == oracle::led_recount(p, labels, opts.window, opts.frac));
    const Box region{{1, 0, 1}, {static_cast<std::int64_t>(d.x) - 1, 2, static_cast<std::int64_t>(d.z)}};
    CHECK(compute_led_mask(p, labels, opts, region) == oracle::led_recount(p, labels, opts.window, opts.frac, &region));
  }

  VoxelMask a(Dims{5, 4, 3}, 1, 0), b(Dims{5, 4, 3}, 1, 0);
  for (auto& v : a.storage()) v = rng.uniform() < 0.3;
  for (auto& v : b.storage()) v = rng.uniform() < 0.3;
  CHECK(merge_masks(a, VoxelMask(a.dims(), 1, 0)) == a);
  CHECK(merge_masks(a, a) == a);
  const auto m = merge_masks(a, b);
  for (std::size_t i = 0; i < m.storage().size(); ++i) CHECK(m.storage()[i] == (a.storage()[i] | b.storage()[i]));
  CHECK_THROWS_AS(merge_masks(a, VoxelMask(Dims{1, 1, 1}, 1, 0)), ValidationError);
}

TEST_CASE("tiled inference equals whole-volume inference") {
  Rng rng(3);
  const auto model = fixtures::random_iteration(fixtures::ms_fv_spec(3), 1, rng);
  const auto image = fixtures::random_volume(Dims{30, 27, 25}, 1, rng, 0, 255);
  const auto whole = infer_iteration(model, image, nullptr, {1, 1000});
  CHECK(whole.valid == support_region(model.extractor.spec(), image.dims()));
  for (auto [workers, tile] : {std::pair{1, 32}, {3, 7}, {2, 1}, {4, 32}}) {
    const auto tiled = infer_iteration(model, image, nullptr, {workers, tile});
    CHECK(tiled.valid == whole.valid);
    CHECK(tiled.affinity == whole.affinity);
  }
  for (std::size_t i = 0; i < image.dims().voxels(); ++i) {
    const Coord c = oracle::coord_of(image.dims(), i);
    for (std::size_t e = 0; e < 3; ++e) {
      const float v = whole.affinity(c, e);
      if (whole.valid.contains(c)) CHECK((v > 0.0f && v < 1.0f));
      else CHECK(v == 0.0f);
    }
  }

  auto second = fixtures::random_iteration(spec_for_iteration(small_config(), 2), 2, rng);
  CHECK_THROWS_AS(infer_iteration(second, image, nullptr), ValidationError);
}

TEST_CASE("inference ignores voxels outside the field of view") {
  Rng rng(4);
  const auto model = fixtures::random_iteration(fixtures::ms_fv_spec(2), 1, rng);
  const auto image = fixtures::random_volume(Dims{28, 28, 28}, 1, rng, 0, 255);
  const auto base = infer_iteration(model, image, nullptr);
  for (int probe = 0; probe < 4; ++probe) {
    const Coord l = random_in(base.valid, rng);
    const Box fov = fov_box(model.extractor.spec(), l);
    Volume changed = image;
    for (std::size_t i = 0; i < changed.storage().size(); ++i)
      if (!fov.contains(oracle::coord_of(image.dims(), i))) changed.storage()[i] = static_cast<float>(rng.uniform(0, 255));
    const auto after = infer_iteration(model, changed, nullptr);
    for (std::size_t e = 0; e < 3; ++e) CHECK(after.affinity(l, e) == base.affinity(l, e));
  }
}

TEST_CASE("a copying classifier makes iteration 2 reproduce iteration 1") {
  Rng rng(5);
  const auto first = fixtures::random_iteration(fixtures::ss_fv_spec(3), 1, rng);
  const auto image = fixtures::random_volume(Dims{24, 24, 24}, 1, rng, 0, 255);
  const auto p1 = infer_iteration(first, image, nullptr);

  const auto spec = fixtures::make_spec(Representation::rf, {3, 3, 3}, {1, 1, 1}, {1},
                                        {{InputGroup::image, 1, 2}, {InputGroup::affinity, 3, 3}}, 0.0);
  std::vector<float> atoms(3 * 81, 0.0f);
  for (std::size_t c = 0; c < 3; ++c) atoms[c * 81 + 13 * 3 + c] = 1.0f;
  IterationModel second;
  second.index = 2;
  second.extractor = FeatureExtractor(
      spec, {fixtures::random_dictionary(spec.patch, 1, 2, rng), Dictionary(spec.patch, 3, DictionaryMethod::omp1, atoms)});
  second.normalizer = fixtures::identity_normalizer(second.extractor.dims());
  REQUIRE(second.extractor.dims() == 10);
  const Classifier copy = [](std::span<const float> f, std::size_t d, std::span<float> out) {
    for (std::size_t r = 0; r < out.size() / 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) out[r * 3 + c] = f[r * d + 4 + c];
  };
  const auto p2 = infer_iteration(second, image, &p1, {}, &copy);
  CHECK(p1.valid.contains(p2.valid));
  CHECK(p2.valid.voxels() > 0);
  std::size_t compared = 0;
  for (std::size_t i = 0; i < image.dims().voxels(); ++i) {
    const Coord c = oracle::coord_of(image.dims(), i);
    if (!p2.valid.contains(c)) continue;
    for (std::size_t e = 0; e < 3; ++e) CHECK(p2.affinity(c, e) == p1.affinity(c, e));
    ++compared;
  }
  CHECK(compared == p2.valid.voxels());
}

TEST_CASE("model field of view") {
  Rng rng(6);
  DawmrModel model;
  IterationConfig c;
  c.dict_size = 4;
  for (int i = 1; i <= 3; ++i) model.iterations.push_back(fixtures::random_iteration(spec_for_iteration(c, i), i, rng, 2));
  using A = std::array<std::int64_t, 3>;
  CHECK(field_of_view(model) == A{54, 54, 54});
  CHECK(strict_field_of_view(model) == A{52, 52, 52});
  CHECK(iteration_fov(model) == std::vector<A>{{18, 18, 18}, {18, 18, 18}, {18, 18, 18}});
  for (std::int64_t x : {30, 31}) {
    const Box b = composed_fov_box(model, {x, x, x});
    Box want{{x, x, x}, {x + 1, x + 1, x + 1}};
    for (std::size_t i = model.iterations.size(); i-- > 0;) {
      const auto& spec = model.iterations[i].extractor.spec();
      Box grown = fov_box(spec, want.lo);
      for (std::int64_t z = want.lo.z; z < want.hi.z; ++z)
        for (std::int64_t y = want.lo.y; y < want.hi.y; ++y)
          for (std::int64_t xx = want.lo.x; xx < want.hi.x; ++xx) {
            const Box f = fov_box(spec, {xx, y, z});
            for (int a = 0; a < 3; ++a) {
              grown.lo[a] = std::min(grown.lo[a], f.lo[a]);
              grown.hi[a] = std::max(grown.hi[a], f.hi[a]);
            }
          }
      want = grown;
    }
    CHECK(b == want);
    for (int a = 0; a < 3; ++a) CHECK(b.extent(a) <= 54);
  }

  DawmrModel ss;
  ss.iterations.push_back(fixtures::random_iteration(fixtures::ss_spec(2), 1, rng, 2));
  CHECK(field_of_view(ss) == A{5, 5, 5});
}

TEST_CASE("preview budget") {
  RecursiveConfig c;
  CHECK(preview_updates(c) == 100000);
  c.iteration.train.updates = 7;
  CHECK(preview_updates(c) == 1);
  c.iteration.train.updates = 13;
  CHECK(preview_updates(c) == 3);
  CHECK(c.preview_fraction == 0.2);
  CHECK(c.led_options.multiplier == 10.0);
  CHECK(c.led_options.frac == 0.5);
  CHECK(c.led_options.window == std::array<int, 3>{5, 5, 5});
}

TEST_CASE("image standardization and augmentation") {
  auto volumes = small_volumes(1, 16);
  const auto scaling = fit_image_scaling({&volumes[0].image});
  const auto z = standardize(volumes[0].image, scaling);
  double mean = 0, sq = 0;
  for (float v : z.storage()) mean += v;
  mean /= static_cast<double>(z.storage().size());
  for (float v : z.storage()) sq += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 1e-5);
  CHECK(std::sqrt(sq / static_cast<double>(z.storage().size())) == doctest::Approx(1.0).epsilon(1e-5));

  volumes[0].labeled = Box{{1, 2, 3}, {10, 12, 14}};
  const auto aug = augment_training_set(volumes);
  REQUIRE(aug.size() == 8);
  CHECK(aug[0].image == volumes[0].image);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(aug[i].labels == affinities_from_segmentation(aug[i].truth).labels);
    CHECK(aug[i].labeled.voxels() == volumes[0].labeled.voxels());
  }
}

TEST_CASE("training an iteration") {
  const auto volumes = small_volumes();
  const auto cfg = small_config();
  const auto model = train_iteration(volumes, cfg, 1);
  CHECK(model.mlp.all_finite());
  CHECK(model.extractor.dims() == 2 * 2 * 4);
  CHECK(model.mlp.sizes == std::vector<std::size_t>{16, 8, 3});
  CHECK(same_model(train_iteration(volumes, cfg, 1), model));

  const auto prep = prepare_iteration(volumes, cfg, 1);
  std::size_t labeled = 0;
  for (const auto& v : volumes) {
    const Box r = support_region(prep.extractor.spec(), v.image.dims());
    labeled += r.voxels();
  }
  CHECK(prep.records.size() == 2 * static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(labeled / 2))));
  CHECK(prep.volume_of.size() == prep.records.size());

  TempDir dir("prep");
  auto with_dir = cfg;
  with_dir.shard_dir = dir.path().string();
  const auto stored = prepare_iteration(volumes, with_dir, 1);
  CHECK(stored.records == prep.records);
  CHECK(std::filesystem::exists(dir / "iter1_vol1_shard2.dwfs"));

  std::vector<VoxelMask> masks;
  for (const auto& v : volumes) masks.emplace_back(v.image.dims(), 1, std::uint8_t{1});
  masks[1] = VoxelMask();
  const auto w = led_weights(prep, masks, 10);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == (prep.volume_of[i] == 0 ? 10.0f : 1.0f));

  auto big = cfg;
  big.scales = {1, 2};
  CHECK_THROWS_AS(train_iteration(small_volumes(1, 8), big, 1), ValidationError);
}

TEST_CASE("recursive training") {
  const auto volumes = small_volumes();
  RecursiveConfig rc;
  rc.iteration = small_config();

  const auto one = train_recursive(volumes, rc);
  REQUIRE(one.iterations.size() == 1);
  CHECK(one.led_masks.empty());
  CHECK(same_model(one.iterations[0], train_iteration(volumes, rc.iteration, 1)));

  rc.iterations = 2;
  rc.led = true;
  const auto two = train_recursive(volumes, rc);
  REQUIRE(two.iterations.size() == 2);
  CHECK(two.iterations[1].index == 2);
  CHECK(two.iterations[1].extractor.spec().groups.size() == 2);
  REQUIRE(two.led_masks.size() == 2);
  CHECK(same_model(train_recursive(volumes, rc), two));

  const auto preds = infer_model(two, volumes[0].image);
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].valid.contains(preds[1].valid));
  CHECK(preds[1].valid == support_region(two.iterations[1].extractor.spec(), volumes[0].image.dims(), preds[0].valid));

  TempDir dir("bundle");
  save_model(two, dir / "m");
  const auto back = load_model(dir / "m");
  CHECK(same_model(back, two));
  const auto again = infer_model(back, volumes[0].image);
  CHECK(again[1].affinity == preds[1].affinity);
  save_model(back, dir / "m2");
  for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "m"))
    CHECK(file_bytes(entry.path().string()) == file_bytes((dir.path() / "m2" / entry.path().filename()).string()));
  CHECK_THROWS_AS(load_model(dir / "missing"), IoError);
}
