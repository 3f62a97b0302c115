#pragma once

#include "dawmr/volume.hpp"

namespace dawmr {

// Joins voxels along in-volume edges with affinity strictly above
// `threshold`. Voxels without such an edge are background (0); components
// are numbered 1..n in order of their first voxel in scan order.
SegmentationVolume segment_components(const AffinityGraph& aff, double threshold);

// Marker-based priority flood. Starting from the seeded voxels, the
// unassigned voxel reached by the highest-affinity edge from an assigned
// voxel takes that voxel's id; ties go to the lower seed id, then the lower
// voxel index. Seeds keep their ids. Without seeds the input is returned.
SegmentationVolume watershed_grow(const SegmentationVolume& seeds, const AffinityGraph& aff);

// Number of distinct nonzero ids.
std::size_t count_segments(const SegmentationVolume& seg);

}  // namespace dawmr
