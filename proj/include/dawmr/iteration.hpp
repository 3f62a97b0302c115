#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dawmr/extractor.hpp"
#include "dawmr/led.hpp"
#include "dawmr/normalizer.hpp"
#include "dawmr/shard.hpp"
#include "dawmr/trainer.hpp"
#include "dawmr/whitening.hpp"

namespace dawmr {

// Everything needed to train one network iteration.
struct IterationConfig {
  PatchSpec patch;
  Representation representation = Representation::foveated;
  std::array<int, 3> neighborhood{5, 5, 5};
  PoolingMode pooling = PoolingMode::max;
  std::vector<int> scales{1, 2};
  EncoderConfig encoder;
  DictionaryMethod method = DictionaryMethod::omp1;
  std::size_t dict_size = 1000;  // per scale, split between groups from iteration 2 on
  bool whitening = false;
  WhiteningOptions whitening_options;
  int dict_epochs = 10;
  std::size_t dict_patches = 10000;
  double subsample_fraction = 0.1;
  std::size_t normalizer_sample = 100000;
  TrainConfig train;
  std::size_t shard_count = 4;
  int workers = 1;
  std::uint64_t seed = 0;
  // When set, feature shards are written here and training reads them back.
  std::string shard_dir;

  void validate() const;
};

// Iteration 1 reads the image only. Later iterations read the image and the
// 3-channel affinity output of the previous iteration, with the per-scale
// dictionary budget split equally between the two groups.
ExtractorSpec spec_for_iteration(const IterationConfig& config, int index);

// Global intensity standardization x -> (x - mean) / std.
struct ImageScaling {
  double mean = 0.0;
  double std = 1.0;
  bool operator==(const ImageScaling&) const = default;
};
ImageScaling fit_image_scaling(const std::vector<const Volume*>& images);
Volume standardize(const Volume& image, const ImageScaling& scaling);

struct IterationModel {
  int index = 1;
  ImageScaling scaling;
  FeatureExtractor extractor;
  FeatureNormalizer normalizer;
  Mlp mlp;
};

// One labeled training subvolume plus the affinity input for the current
// iteration (empty before iteration 2).
struct TrainingVolume {
  Volume image;
  SegmentationVolume truth;
  LabelMask labels;
  Box labeled;
  AffinityGraph affinity;
  Box input_valid;
};

// Labels are derived from `truth`. An empty `labeled` box means the whole volume.
TrainingVolume make_training_volume(Volume image, SegmentationVolume truth, Box labeled = {});

// The eight plane transforms of every volume, labels regenerated from each
// transformed segmentation.
std::vector<TrainingVolume> augment_training_set(const std::vector<TrainingVolume>& volumes);

struct Prediction {
  AffinityGraph affinity;
  Box valid;
};

// Dictionaries, features and normalizer of an iteration, before any MLP is
// trained on them. Record features are already normalized.
struct PreparedIteration {
  int index = 1;
  ImageScaling scaling;
  FeatureExtractor extractor;
  FeatureNormalizer normalizer;
  FeatureShard records;
  std::vector<std::size_t> volume_of;  // training volume of each record
};

struct LearnedFeatures {
  ImageScaling scaling;
  FeatureExtractor extractor;
};

// Image scaling and dictionaries of an iteration (the first stage of
// prepare_iteration, with the same seeds).
LearnedFeatures learn_features(const std::vector<TrainingVolume>& volumes, const IterationConfig& config, int index);

PreparedIteration prepare_iteration(const std::vector<TrainingVolume>& volumes, const IterationConfig& config,
                                    int index);

// Per-record sampling multipliers: `multiplier` where the record's volume
// mask is set, 1 elsewhere.
std::vector<float> led_weights(const PreparedIteration& prepared, const std::vector<VoxelMask>& masks,
                               double multiplier);

IterationModel train_prepared(const PreparedIteration& prepared, const TrainConfig& train,
                              std::span<const float> weights = {});

// prepare_iteration followed by train_prepared with the config's seeds.
IterationModel train_iteration(const std::vector<TrainingVolume>& volumes, const IterationConfig& config, int index,
                               std::span<const float> weights = {});

// Seed of the MLP trained for iteration `index`; `preview` selects the seed of
// the short LED preview run.
std::uint64_t iteration_train_seed(const IterationConfig& config, int index, bool preview = false);

struct InferenceOptions {
  int workers = 1;
  std::int64_t tile = 32;  // side of the cubic tiles inference walks through
};

// Maps a row-major n x d block of normalized features to n x 3 outputs.
using Classifier = std::function<void(std::span<const float> features, std::size_t d, std::span<float> out)>;

// Predicts every voxel whose feature support lies inside the volume and,
// for iterations >= 2, inside the valid region of `affinity_input`. Voxels
// outside the returned valid box are 0. `classifier` replaces the MLP.
Prediction infer_iteration(const IterationModel& model, const Volume& image, const Prediction* affinity_input,
                           const InferenceOptions& options = {}, const Classifier* classifier = nullptr);

}  // namespace dawmr
