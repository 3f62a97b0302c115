#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dawmr/volume.hpp"

namespace dawmr {

struct SyntheticParams {
  Dims dims{32, 32, 32};
  int num_seeds = 6;
  double boundary_width = 1.0;  // voxels closer than this to a cell wall become background
  double noise_sigma = 0.0;
  double blur_sigma = 0.0;
  std::uint64_t seed = 0;
  float interior_level = 180.0f;
  float boundary_level = 60.0f;
  // Inside this region cell interiors are darkened so that only
  // `faint_contrast` of the normal interior/boundary contrast remains. A
  // classifier fitted to the rest of the volume mistakes these interiors for
  // boundary, which gives a locally dense cluster of errors.
  std::optional<Box> faint_region;
  double faint_contrast = 0.25;
};

struct SyntheticVolume {
  Volume image;
  SegmentationVolume truth;
  std::vector<std::array<double, 3>> seeds;
};

// Voronoi neuropil stand-in. Cell i (id i + 1) is the set of voxels nearest
// seed i; voxels within boundary_width of a cell wall are background. Each
// cell keeps only its largest face-connected piece, and pieces smaller than
// two voxels are dropped, so every object is face-connected.
SyntheticVolume generate_synthetic(const SyntheticParams& params);

// Separable Gaussian blur with clamp-to-edge borders (radius ceil(3 sigma)).
Volume gaussian_blur(const Volume& vol, double sigma);

}  // namespace dawmr
