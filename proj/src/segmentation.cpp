#include "dawmr/segmentation.hpp"

#include <numeric>
#include <queue>
#include <unordered_set>
#include <vector>

#include "dawmr/affinity.hpp"

namespace dawmr {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // The smaller root wins, so roots stay at the first voxel of each set.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

void check_affinity(const AffinityGraph& aff) { require(aff.channels() == 3, "affinity graphs have 3 channels"); }

}  // namespace

SegmentationVolume segment_components(const AffinityGraph& aff, double threshold) {
  check_affinity(aff);
  const Dims d = aff.dims();
  const std::size_t n = d.voxels();
  UnionFind uf(n);
  std::vector<std::uint8_t> touched(n, 0);
  const std::size_t stride[3] = {1, d.x, d.x * d.y};
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        const Coord v{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), static_cast<std::int64_t>(z)};
        const std::size_t i = aff.index(x, y, z) / 3;
        for (int e = 0; e < 3; ++e) {
          if (!edge_in_volume(d, v, e) || !(aff(x, y, z, static_cast<std::size_t>(e)) > threshold)) continue;
          const std::size_t j = i + stride[e];
          uf.unite(i, j);
          touched[i] = touched[j] = 1;
        }
      }
  SegmentationVolume out(d, 1, 0u);
  std::vector<std::uint32_t> label(n, 0);
  std::uint32_t next = 0;
  auto& ids = out.storage();
  for (std::size_t i = 0; i < n; ++i) {
    if (!touched[i]) continue;
    const std::size_t r = uf.find(i);
    if (label[r] == 0) label[r] = ++next;
    ids[i] = label[r];
  }
  return out;
}

SegmentationVolume watershed_grow(const SegmentationVolume& seeds, const AffinityGraph& aff) {
  check_affinity(aff);
  require(seeds.dims() == aff.dims() && seeds.channels() == 1, "seeds and affinities are not aligned");
  const Dims d = aff.dims();
  const auto X = static_cast<std::int64_t>(d.x), Y = static_cast<std::int64_t>(d.y),
             Z = static_cast<std::int64_t>(d.z);
  SegmentationVolume out = seeds;
  auto& ids = out.storage();
  const auto& a = aff.storage();

  struct Entry {
    float affinity;
    std::uint32_t id;
    std::size_t voxel;
  };
  // Max-heap on affinity, then min on id, then min on voxel index.
  auto after = [](const Entry& p, const Entry& q) {
    if (p.affinity != q.affinity) return p.affinity < q.affinity;
    if (p.id != q.id) return p.id > q.id;
    return p.voxel > q.voxel;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(after)> heap(after);

  auto push_neighbours = [&](std::size_t i) {
    const auto x = static_cast<std::int64_t>(i % d.x), y = static_cast<std::int64_t>((i / d.x) % d.y),
               z = static_cast<std::int64_t>(i / (d.x * d.y));
    const std::uint32_t id = ids[i];
    auto consider = [&](bool inside, std::size_t j, std::size_t edge_voxel, int channel) {
      if (!inside || ids[j] != 0) return;
      heap.push({a[edge_voxel * 3 + static_cast<std::size_t>(channel)], id, j});
    };
    const std::size_t sx = 1, sy = d.x, sz = d.x * d.y;
    consider(x + 1 < X, i + sx, i, 0);
    consider(x > 0, i - sx, i - sx, 0);
    consider(y + 1 < Y, i + sy, i, 1);
    consider(y > 0, i - sy, i - sy, 1);
    consider(z + 1 < Z, i + sz, i, 2);
    consider(z > 0, i - sz, i - sz, 2);
  };

  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] != 0) push_neighbours(i);
  while (!heap.empty()) {
    const Entry e = heap.top();
    heap.pop();
    if (ids[e.voxel] != 0) continue;
    ids[e.voxel] = e.id;
    push_neighbours(e.voxel);
  }
  return out;
}

std::size_t count_segments(const SegmentationVolume& seg) {
  std::unordered_set<std::uint32_t> ids;
  for (std::uint32_t v : seg.storage())
    if (v != 0) ids.insert(v);
  return ids.size();
}

}  // namespace dawmr
