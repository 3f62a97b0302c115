#pragma once

#include <array>

#include "dawmr/volume.hpp"

namespace dawmr {

struct LedOptions {
  std::array<int, 3> window{5, 5, 5};  // odd sides
  double frac = 0.5;
  double multiplier = 10.0;
};

// Marks voxels whose window contains more than `frac` misclassified edges,
// counting only edges with a known truth label anchored inside `region`.
// An edge is misclassified when (pred > 0.5) disagrees with its label.
// Voxels whose window holds no counted edge stay unmasked.
VoxelMask compute_led_mask(const AffinityGraph& pred, const LabelMask& truth, const LedOptions& options,
                           const Box& region);
VoxelMask compute_led_mask(const AffinityGraph& pred, const LabelMask& truth, const LedOptions& options = {});

VoxelMask merge_masks(const VoxelMask& a, const VoxelMask& b);

}  // namespace dawmr
