#pragma once

#include <vector>

#include "dawmr/volume.hpp"

namespace dawmr {

// Block-mean downsampling. Output dims are floor(dims / factor); voxels past
// the last full block are dropped. Works on every channel independently.
Volume downsample_average(const Volume& vol, int factor);

// One element of the xy-plane dihedral group: an optional reflection
// y -> Y-1-y followed by `rotation` quarter turns (x, y) -> (Y-1-y, x).
struct PlaneTransform {
  int rotation = 0;  // 0..3
  bool reflect = false;
};

// The eight group elements in augmentation order; element 0 is the identity.
std::vector<PlaneTransform> plane_group();

template <typename T>
Grid<T> apply_transform(const Grid<T>& in, PlaneTransform t);

// Image of a half-open box under `t` applied to a grid of size `dims`.
Box transform_box(const Box& box, const Dims& dims, PlaneTransform t);

struct AugmentedPair {
  Volume image;
  SegmentationVolume seg;
};

// Orbit of (seg, img) under plane_group(). Labels are meant to be regenerated
// from each transformed segmentation, never by permuting edge channels.
std::vector<AugmentedPair> augment_eightfold(const SegmentationVolume& seg, const Volume& img);

}  // namespace dawmr
