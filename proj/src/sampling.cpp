#include "dawmr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dawmr/rng.hpp"

namespace dawmr {

bool is_labeled(const LabelMask& labels, const Coord& c) {
  return labels(c, 0) != 0 || labels(c, 1) != 0 || labels(c, 2) != 0;
}

std::vector<SampledLocation> subsample_locations(const std::vector<LabeledRegion>& catalog, double fraction,
                                                 std::uint64_t seed) {
  require(!catalog.empty(), "subsample_locations: empty catalog");
  require(fraction > 0.0 && fraction <= 1.0, "subsample fraction must be in (0, 1]");
  std::vector<SampledLocation> out;
  for (std::size_t s = 0; s < catalog.size(); ++s) {
    const LabelMask& labels = *catalog[s].labels;
    const Box region = catalog[s].region.intersect(labels.box());
    std::vector<Coord> candidates;
    for (std::int64_t z = region.lo.z; z < region.hi.z; ++z)
      for (std::int64_t y = region.lo.y; y < region.hi.y; ++y)
        for (std::int64_t x = region.lo.x; x < region.hi.x; ++x)
          if (is_labeled(labels, {x, y, z})) candidates.push_back({x, y, z});

    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(candidates.size())));
    // Partial Fisher-Yates over indices, then restore scan order.
    Rng rng(mix_seed(seed, s));
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
      std::swap(order[i], order[j]);
    }
    order.resize(take);
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) out.push_back({s, candidates[i]});
  }
  return out;
}

std::vector<CatalogEntry> read_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open catalog: " + path);
  std::vector<CatalogEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    CatalogEntry e;
    if (!(fields >> e.image_path)) continue;
    if (!(fields >> e.segmentation_path))
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected 'image seg [box]'");
    std::vector<std::int64_t> box;
    std::int64_t v;
    while (fields >> v) box.push_back(v);
    if (!box.empty()) {
      if (box.size() != 6) throw ValidationError(path + ":" + std::to_string(line_no) + ": box needs 6 integers");
      e.labeled = {{box[0], box[1], box[2]}, {box[3], box[4], box[5]}};
    }
    entries.push_back(e);
  }
  require(!entries.empty(), "catalog " + path + " lists no subvolumes");
  return entries;
}

}  // namespace dawmr
