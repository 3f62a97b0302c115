#pragma once

#include "dawmr/volume.hpp"

namespace dawmr {

struct AffinityLabels {
  AffinityGraph affinity;  // 1 = same foreground object, 0 otherwise
  LabelMask labels;        // +1 / -1, 0 on edges leaving the volume
};

// Ground-truth affinity graph of a segmentation. Edge (v, v + e_d) is positive
// iff both voxels carry the same nonzero id; edges whose far endpoint lies
// outside the volume are stored as 0 with label 0.
AffinityLabels affinities_from_segmentation(const SegmentationVolume& seg);

// True iff the edge anchored at `v` in direction `d` stays inside `dims`.
inline bool edge_in_volume(const Dims& dims, const Coord& v, int d) {
  const Coord w = v + kEdgeOffsets[d];
  return w[d] < static_cast<std::int64_t>(dims[d]);
}

}  // namespace dawmr
