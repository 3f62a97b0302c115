#include "dawmr/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "dawmr/affinity.hpp"
#include "dawmr/sampling.hpp"
#include "dawmr/transform.hpp"

namespace dawmr {

namespace {

// Salts for the per-iteration seed streams.
enum Salt : std::uint64_t {
  kSubsample = 1,
  kNormalizerSample = 2,
  kTrain = 3,
  kPreview = 4,
  kPatches = 100,
  kDictionaries = 200,
};

std::uint64_t iteration_seed(const IterationConfig& c, int index) {
  return mix_seed(c.seed, static_cast<std::uint64_t>(index));
}

// Centres whose patch, mapped back to full resolution, lies inside `valid`.
Box centre_box(const PatchSpec& patch, const Dims& scaled_dims, int s, const Box& valid) {
  Box b = patch_centre_box(patch, scaled_dims);
  for (int a = 0; a < 3; ++a) {
    const std::int64_t h = patch.half(a);
    const std::int64_t lo = (valid.lo[a] + s - 1) / s + h;
    const std::int64_t hi = valid.hi[a] / s - h;
    b.lo[a] = std::max(b.lo[a], lo);
    b.hi[a] = std::max(b.lo[a], std::min(b.hi[a], hi));
  }
  return b;
}

Box input_valid_of(const TrainingVolume& v) {
  return v.affinity.empty() ? v.image.box() : v.input_valid;
}

ExtractorInputs inputs_of(const Volume& image, const AffinityGraph* affinity) {
  ExtractorInputs in;
  in.image = &image;
  in.affinity = affinity;
  return in;
}

}  // namespace

void IterationConfig::validate() const {
  patch.validate();
  require(dict_size >= 1, "dict_size must be >= 1");
  require(dict_epochs >= 1, "dictionary epochs must be >= 1");
  require(dict_patches >= 1, "dictionary patch count must be >= 1");
  require(subsample_fraction > 0.0 && subsample_fraction <= 1.0, "subsample_fraction must be in (0, 1]");
  require(normalizer_sample >= 2, "normalizer sample must be >= 2");
  require(shard_count >= 1, "shard_count must be >= 1");
  require(workers >= 1, "workers must be >= 1");
  require(encoder.kind != EncoderKind::triangle_kmeans || method == DictionaryMethod::kmeans,
          "triangle encoding requires k-means dictionaries");
  train.validate();
  spec_for_iteration(*this, 1).validate();
}

ExtractorSpec spec_for_iteration(const IterationConfig& config, int index) {
  require(index >= 1, "iteration index must be >= 1");
  ExtractorSpec spec;
  spec.patch = config.patch;
  spec.representation = config.representation;
  spec.neighborhood = config.neighborhood;
  spec.pooling = config.pooling;
  spec.scales = config.scales;
  spec.encoder = config.encoder;
  if (index == 1) {
    spec.groups = {{InputGroup::image, 1, config.dict_size}};
  } else {
    require(config.dict_size >= 2, "recursive iterations need dict_size >= 2 to split between inputs");
    const std::size_t image_share = config.dict_size / 2;
    spec.groups = {{InputGroup::image, 1, image_share}, {InputGroup::affinity, 3, config.dict_size - image_share}};
  }
  return spec;
}

ImageScaling fit_image_scaling(const std::vector<const Volume*>& images) {
  require(!images.empty(), "no images to fit a scaling on");
  double sum = 0.0, n = 0.0;
  for (const Volume* v : images)
    for (float x : v->storage()) sum += x;
  for (const Volume* v : images) n += static_cast<double>(v->storage().size());
  const double mean = sum / n;
  double ss = 0.0;
  for (const Volume* v : images)
    for (float x : v->storage()) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  return {mean, sd > 1e-12 ? sd : 1.0};
}

Volume standardize(const Volume& image, const ImageScaling& scaling) {
  Volume out = image;
  for (float& x : out.storage()) x = static_cast<float>((static_cast<double>(x) - scaling.mean) / scaling.std);
  return out;
}

TrainingVolume make_training_volume(Volume image, SegmentationVolume truth, Box labeled) {
  require(image.channels() == 1, "training images must be single-channel");
  require(image.dims() == truth.dims(), "image and segmentation dims differ");
  TrainingVolume v;
  v.labels = affinities_from_segmentation(truth).labels;
  v.labeled = labeled.empty() ? image.box() : labeled;
  require(image.box().contains(v.labeled), "labeled box " + to_string(v.labeled) + " lies outside its volume");
  v.input_valid = image.box();
  v.image = std::move(image);
  v.truth = std::move(truth);
  return v;
}

std::vector<TrainingVolume> augment_training_set(const std::vector<TrainingVolume>& volumes) {
  std::vector<TrainingVolume> out;
  for (const TrainingVolume& v : volumes) {
    require(v.affinity.empty(), "augmentation applies to raw training volumes only");
    for (const PlaneTransform& t : plane_group()) {
      TrainingVolume a = make_training_volume(apply_transform(v.image, t), apply_transform(v.truth, t),
                                              transform_box(v.labeled, v.image.dims(), t));
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::uint64_t iteration_train_seed(const IterationConfig& config, int index, bool preview) {
  return mix_seed(iteration_seed(config, index), preview ? kPreview : kTrain);
}

namespace {

struct IterationInputs {
  std::vector<Volume> images;
  std::vector<ScaledInputs> scaled;
};

IterationInputs build_inputs(const std::vector<TrainingVolume>& volumes, const ExtractorSpec& spec,
                             const ImageScaling& scaling, int index) {
  IterationInputs in;
  in.images.reserve(volumes.size());
  in.scaled.reserve(volumes.size());
  for (const TrainingVolume& v : volumes) {
    if (index >= 2) require(!v.affinity.empty(), "iteration >= 2 needs an affinity input for every volume");
    in.images.push_back(standardize(v.image, scaling));
    in.scaled.emplace_back(spec, inputs_of(in.images.back(), index >= 2 ? &v.affinity : nullptr));
  }
  return in;
}

ImageScaling scaling_of(const std::vector<TrainingVolume>& volumes) {
  std::vector<const Volume*> raw;
  for (const TrainingVolume& v : volumes) raw.push_back(&v.image);
  return fit_image_scaling(raw);
}

// One dictionary per (scale, group), from patches drawn uniformly over all
// volumes.
FeatureExtractor learn_extractor(const std::vector<TrainingVolume>& volumes, const IterationInputs& inputs,
                                 const IterationConfig& config, const ExtractorSpec& spec, std::uint64_t seed) {
  std::vector<Dictionary> dictionaries;
  for (std::size_t si = 0; si < spec.scales.size(); ++si)
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
      const std::uint64_t slot = si * spec.groups.size() + g;
      const ChannelGroup& group = spec.groups[g];
      Rng rng(mix_seed(seed, kPatches + slot));
      PatchSet patches;
      patches.dim = config.patch.voxels() * group.channels;
      patches.values.resize(config.dict_patches * patches.dim);
      std::vector<Box> boxes;
      for (std::size_t v = 0; v < volumes.size(); ++v) {
        const Volume& in = inputs.scaled[v].at(si, g);
        const Box valid = group.input == InputGroup::affinity ? input_valid_of(volumes[v]) : volumes[v].image.box();
        boxes.push_back(centre_box(config.patch, in.dims(), spec.scales[si], valid));
      }
      std::vector<std::size_t> usable;
      for (std::size_t v = 0; v < boxes.size(); ++v)
        if (!boxes[v].empty()) usable.push_back(v);
      require(!usable.empty(), "no volume is large enough to sample dictionary patches");
      for (std::size_t p = 0; p < config.dict_patches; ++p) {
        const std::size_t v = usable[rng.below(usable.size())];
        const Box& b = boxes[v];
        Coord c;
        for (int a = 0; a < 3; ++a)
          c[a] = b.lo[a] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(b.extent(a))));
        extract_patch_into(inputs.scaled[v].at(si, g), c, config.patch, patches.row(p));
      }
      WhiteningTransform whitening;
      if (config.whitening) {
        whitening = fit_whitening(patches, config.whitening_options);
        std::vector<double> scratch(patches.dim);
        for (std::size_t p = 0; p < patches.size(); ++p) whitening.apply(patches.row(p), scratch);
      }
      DictionaryLearningOptions opts;
      opts.k = group.dict_size;
      opts.epochs = config.dict_epochs;
      opts.seed = mix_seed(seed, kDictionaries + slot);
      LearnedDictionary learned =
          config.method == DictionaryMethod::omp1
              ? learn_dictionary_omp1(patches, config.patch, group.channels, opts, whitening)
              : learn_dictionary_kmeans(patches, config.patch, group.channels, opts, whitening);
      dictionaries.push_back(std::move(learned.dictionary));
    }
  return FeatureExtractor(spec, std::move(dictionaries));
}

}  // namespace

LearnedFeatures learn_features(const std::vector<TrainingVolume>& volumes, const IterationConfig& config, int index) {
  config.validate();
  require(!volumes.empty(), "no training volumes");
  const ExtractorSpec spec = spec_for_iteration(config, index);
  LearnedFeatures out;
  out.scaling = scaling_of(volumes);
  const IterationInputs inputs = build_inputs(volumes, spec, out.scaling, index);
  out.extractor = learn_extractor(volumes, inputs, config, spec, iteration_seed(config, index));
  return out;
}

PreparedIteration prepare_iteration(const std::vector<TrainingVolume>& volumes, const IterationConfig& config,
                                    int index) {
  config.validate();
  require(!volumes.empty(), "no training volumes");
  const std::uint64_t seed = iteration_seed(config, index);
  const ExtractorSpec spec = spec_for_iteration(config, index);

  PreparedIteration prep;
  prep.index = index;
  prep.scaling = scaling_of(volumes);
  const IterationInputs inputs = build_inputs(volumes, spec, prep.scaling, index);
  const std::vector<ScaledInputs>& scaled = inputs.scaled;
  prep.extractor = learn_extractor(volumes, inputs, config, spec, seed);

  // Labeled locations with full feature support, subsampled per volume.
  std::vector<LabeledRegion> catalog;
  for (const TrainingVolume& v : volumes)
    catalog.push_back({&v.labels, support_region(spec, v.image.dims(), input_valid_of(v)).intersect(v.labeled)});
  const auto sampled = subsample_locations(catalog, config.subsample_fraction, mix_seed(seed, kSubsample));
  std::vector<std::vector<LabeledLocation>> per_volume(volumes.size());
  for (const SampledLocation& s : sampled) {
    const LabelMask& labels = volumes[s.subvolume].labels;
    per_volume[s.subvolume].push_back(
        {s.coord, {labels(s.coord, 0), labels(s.coord, 1), labels(s.coord, 2)}});
  }

  prep.records.d = prep.extractor.dims();
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    if (per_volume[v].empty()) continue;
    std::vector<FeatureShard> shards =
        precompute_features(prep.extractor, scaled[v], per_volume[v], config.shard_count, config.workers);
    if (!config.shard_dir.empty()) {
      std::filesystem::create_directories(config.shard_dir);
      for (std::size_t s = 0; s < shards.size(); ++s) {
        const std::string path = config.shard_dir + "/iter" + std::to_string(index) + "_vol" + std::to_string(v) +
                                 "_shard" + std::to_string(s) + ".dwfs";
        write_shard(shards[s], path);
        shards[s] = read_shard(path);
      }
    }
    const FeatureShard merged = merge_shards(shards);
    prep.records.append(merged);
    prep.volume_of.insert(prep.volume_of.end(), merged.size(), v);
  }
  require(prep.records.size() >= 2, "insufficient labeled interior: fewer than two training locations remain");

  // Normalizer on a random subset of records.
  const std::size_t n = prep.records.size(), d = prep.records.d;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (n > config.normalizer_sample) {
    Rng rng(mix_seed(seed, kNormalizerSample));
    for (std::size_t i = 0; i < config.normalizer_sample; ++i) std::swap(pick[i], pick[i + rng.below(n - i)]);
    pick.resize(config.normalizer_sample);
    std::sort(pick.begin(), pick.end());
  }
  std::vector<float> sample;
  sample.reserve(pick.size() * d);
  for (std::size_t i : pick) {
    const auto row = prep.records.row(i);
    sample.insert(sample.end(), row.begin(), row.end());
  }
  prep.normalizer = fit_normalizer(sample, d);
  prep.normalizer.apply_rows(prep.records.features);
  return prep;
}

std::vector<float> led_weights(const PreparedIteration& prepared, const std::vector<VoxelMask>& masks,
                               double multiplier) {
  require(multiplier >= 1.0, "LED multiplier must be >= 1");
  std::vector<float> w(prepared.records.size(), 1.0f);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t v = prepared.volume_of[i];
    require(v < masks.size(), "missing LED mask for a training volume");
    if (masks[v].empty()) continue;
    if (masks[v](prepared.records.records[i].coord) != 0) w[i] = static_cast<float>(multiplier);
  }
  return w;
}

IterationModel train_prepared(const PreparedIteration& prepared, const TrainConfig& train,
                              std::span<const float> weights) {
  std::vector<std::int8_t> labels;
  labels.reserve(prepared.records.size() * 3);
  for (const LabeledLocation& r : prepared.records.records) labels.insert(labels.end(), r.labels.begin(), r.labels.end());
  IterationModel model;
  model.index = prepared.index;
  model.scaling = prepared.scaling;
  model.extractor = prepared.extractor;
  model.normalizer = prepared.normalizer;
  model.mlp = train_mlp(prepared.records.features, prepared.records.d, labels, weights, train);
  return model;
}

IterationModel train_iteration(const std::vector<TrainingVolume>& volumes, const IterationConfig& config, int index,
                               std::span<const float> weights) {
  const PreparedIteration prepared = prepare_iteration(volumes, config, index);
  TrainConfig train = config.train;
  train.seed = iteration_train_seed(config, index);
  return train_prepared(prepared, train, weights);
}

Prediction infer_iteration(const IterationModel& model, const Volume& image, const Prediction* affinity_input,
                           const InferenceOptions& options, const Classifier* classifier) {
  require(options.tile >= 1, "tile size must be >= 1");
  require(image.channels() == 1, "inference expects a single-channel image");
  const ExtractorSpec& spec = model.extractor.spec();
  const bool needs_affinity = model.index >= 2;
  if (needs_affinity && affinity_input == nullptr)
    throw ValidationError("iteration " + std::to_string(model.index) + " needs an affinity input");
  Box input_valid = image.box();
  if (needs_affinity) {
    require(affinity_input->affinity.dims() == image.dims(), "affinity input dims differ from the image");
    input_valid = affinity_input->valid;
  }
  const Volume standardized = standardize(image, model.scaling);
  const ScaledInputs scaled(spec, inputs_of(standardized, needs_affinity ? &affinity_input->affinity : nullptr));

  Prediction out;
  out.affinity = AffinityGraph(image.dims(), 3, 0.0f);
  out.valid = support_region(spec, image.dims(), input_valid);
  if (out.valid.empty()) return out;

  const std::size_t d = model.extractor.dims();
  const std::int64_t t = options.tile;
  std::vector<Coord> coords;
  for (std::int64_t tz = out.valid.lo.z; tz < out.valid.hi.z; tz += t)
    for (std::int64_t ty = out.valid.lo.y; ty < out.valid.hi.y; ty += t)
      for (std::int64_t tx = out.valid.lo.x; tx < out.valid.hi.x; tx += t) {
        const Box tile = Box{{tx, ty, tz}, {tx + t, ty + t, tz + t}}.intersect(out.valid);
        coords.clear();
        for (std::int64_t z = tile.lo.z; z < tile.hi.z; ++z)
          for (std::int64_t y = tile.lo.y; y < tile.hi.y; ++y)
            for (std::int64_t x = tile.lo.x; x < tile.hi.x; ++x) coords.push_back({x, y, z});
        std::vector<float> features = model.extractor.extract_batch(scaled, coords, options.workers);
        model.normalizer.apply_rows(features);
        std::vector<float> outputs;
        if (classifier != nullptr) {
          outputs.resize(coords.size() * 3);
          (*classifier)(features, d, outputs);
        } else {
          outputs = predict(model.mlp, features, options.workers);
        }
        for (std::size_t i = 0; i < coords.size(); ++i)
          for (std::size_t c = 0; c < 3; ++c) out.affinity(coords[i], c) = outputs[i * 3 + c];
      }
  return out;
}

}  // namespace dawmr
