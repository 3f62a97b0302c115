#include "dawmr/affinity.hpp"

namespace dawmr {

AffinityLabels affinities_from_segmentation(const SegmentationVolume& seg) {
  require(seg.channels() == 1, "segmentation must have one channel");
  const Dims& dims = seg.dims();
  AffinityLabels out{AffinityGraph(dims, 3, 0.0f), LabelMask(dims, 3, 0)};
  for (std::size_t z = 0; z < dims.z; ++z)
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const Coord v{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), static_cast<std::int64_t>(z)};
        const std::uint32_t id = seg(v);
        for (int d = 0; d < 3; ++d) {
          if (!edge_in_volume(dims, v, d)) continue;
          const bool same = id != 0 && seg(v + kEdgeOffsets[d]) == id;
          out.affinity(v, d) = same ? 1.0f : 0.0f;
          out.labels(v, d) = same ? 1 : -1;
        }
      }
  return out;
}

}  // namespace dawmr
