#pragma once

#include <array>
#include <vector>

#include "dawmr/iteration.hpp"

namespace dawmr {

// Stacked iterations N_1 ... N_k plus the cumulative LED mask of each
// training volume (empty when LED weighting was off).
struct DawmrModel {
  std::vector<IterationModel> iterations;
  std::vector<VoxelMask> led_masks;
};

struct RecursiveConfig {
  int iterations = 1;
  bool led = false;
  LedOptions led_options;
  double preview_fraction = 0.2;
  IterationConfig iteration;

  void validate() const;
};

// Update budget of the LED preview MLP: round(preview_fraction * updates).
std::size_t preview_updates(const RecursiveConfig& config);

// Trains iterations 1..k on `volumes` (augment beforehand if wanted). With
// LED on, each iteration first trains a preview MLP on the same features,
// predicts the training volumes, ORs the resulting LED masks into the
// cumulative masks and then trains the full MLP with masked records drawn
// `led_options.multiplier` times as often.
DawmrModel train_recursive(std::vector<TrainingVolume> volumes, const RecursiveConfig& config);

// Outputs of every iteration on `image`; element i feeds iteration i + 2.
std::vector<Prediction> infer_model(const DawmrModel& model, const Volume& image, const InferenceOptions& options = {});

// Per-iteration field of view and the reported total, which adds them up.
std::vector<std::array<std::int64_t, 3>> iteration_fov(const DawmrModel& model);
std::array<std::int64_t, 3> field_of_view(const DawmrModel& model);
// Receptive-field composition of the stack: fov_1 + sum_{i >= 2} (fov_i - 1).
std::array<std::int64_t, 3> strict_field_of_view(const DawmrModel& model);

// Exact set of image voxels that can influence the final prediction at `l`.
Box composed_fov_box(const DawmrModel& model, const Coord& l);

}  // namespace dawmr
