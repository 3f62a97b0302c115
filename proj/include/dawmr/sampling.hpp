#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dawmr/volume.hpp"

namespace dawmr {

// One densely labeled subvolume: its edge labels and the region in which
// locations may be drawn.
struct LabeledRegion {
  const LabelMask* labels = nullptr;
  Box region;
};

struct SampledLocation {
  std::size_t subvolume = 0;
  Coord coord;
  bool operator==(const SampledLocation&) const = default;
};

// True iff at least one of the three edge labels at `c` is known.
bool is_labeled(const LabelMask& labels, const Coord& c);

// Uniform sampling without replacement of round(fraction * count) labeled
// locations, drawn independently within each region. Each region's picks
// are returned in scan order; regions appear in catalog order.
std::vector<SampledLocation> subsample_locations(const std::vector<LabeledRegion>& catalog, double fraction,
                                                 std::uint64_t seed);

// File-level catalog entry: paths plus the labeled bounding box.
struct CatalogEntry {
  std::string image_path;
  std::string segmentation_path;
  Box labeled;  // empty box means "whole volume"
};

// Text catalog: one entry per line, "image seg [x0 y0 z0 x1 y1 z1]",
// '#' starts a comment.
std::vector<CatalogEntry> read_catalog(const std::string& path);

}  // namespace dawmr
