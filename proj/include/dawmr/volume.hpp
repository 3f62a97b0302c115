#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dawmr/common.hpp"

namespace dawmr {

struct Dims {
  std::size_t x = 0, y = 0, z = 0;

  std::size_t voxels() const { return x * y * z; }
  std::size_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool operator==(const Dims&) const = default;
};

// Signed voxel coordinate; may lie outside a volume.
struct Coord {
  std::int64_t x = 0, y = 0, z = 0;

  std::int64_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::int64_t& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool operator==(const Coord&) const = default;
};

// Half-open axis-aligned box [lo, hi).
struct Box {
  Coord lo, hi;

  static Box of(const Dims& d) {
    return {{0, 0, 0},
            {static_cast<std::int64_t>(d.x), static_cast<std::int64_t>(d.y),
             static_cast<std::int64_t>(d.z)}};
  }

  bool empty() const { return hi.x <= lo.x || hi.y <= lo.y || hi.z <= lo.z; }
  std::int64_t extent(int axis) const { return hi[axis] - lo[axis]; }
  std::size_t voxels() const {
    return empty() ? 0 : static_cast<std::size_t>(extent(0) * extent(1) * extent(2));
  }
  bool contains(const Coord& c) const {
    return c.x >= lo.x && c.x < hi.x && c.y >= lo.y && c.y < hi.y && c.z >= lo.z && c.z < hi.z;
  }
  bool contains(const Box& b) const {
    if (b.empty()) return true;
    for (int a = 0; a < 3; ++a)
      if (b.lo[a] < lo[a] || b.hi[a] > hi[a]) return false;
    return true;
  }
  Box intersect(const Box& b) const;
  Box grown(std::int64_t margin) const;
  bool operator==(const Box&) const = default;
};

std::string to_string(const Box& box);

// Dense multi-channel 3D grid. Element (x, y, z, c) lives at
// ((z * Y + y) * X + x) * C + c.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(Dims dims, std::size_t channels, T fill = T{}) : dims_(dims), channels_(channels) {
    check_shape();
    data_.assign(dims.voxels() * channels, fill);
  }
  Grid(Dims dims, std::size_t channels, std::vector<T> data)
      : dims_(dims), channels_(channels), data_(std::move(data)) {
    check_shape();
    require(data_.size() == dims.voxels() * channels, "grid data length does not match dims");
  }

  const Dims& dims() const { return dims_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  Box box() const { return Box::of(dims_); }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z, std::size_t c = 0) const {
    return ((z * dims_.y + y) * dims_.x + x) * channels_ + c;
  }
  std::size_t index(const Coord& p, std::size_t c = 0) const {
    return index(static_cast<std::size_t>(p.x), static_cast<std::size_t>(p.y),
                 static_cast<std::size_t>(p.z), c);
  }

  T& operator()(std::size_t x, std::size_t y, std::size_t z, std::size_t c = 0) {
    return data_[index(x, y, z, c)];
  }
  const T& operator()(std::size_t x, std::size_t y, std::size_t z, std::size_t c = 0) const {
    return data_[index(x, y, z, c)];
  }
  T& operator()(const Coord& p, std::size_t c = 0) { return data_[index(p, c)]; }
  const T& operator()(const Coord& p, std::size_t c = 0) const { return data_[index(p, c)]; }

  bool in_bounds(const Coord& p) const { return box().contains(p); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  void check_shape() const {
    require(dims_.x >= 1 && dims_.y >= 1 && dims_.z >= 1, "all grid dims must be >= 1");
    require(channels_ >= 1, "grid needs at least one channel");
  }

  Dims dims_{};
  std::size_t channels_ = 0;
  std::vector<T> data_;
};

// 32-bit float scalar field: raw images and affinity graphs.
using Volume = Grid<float>;
// Segment ids, 0 = background.
using SegmentationVolume = Grid<std::uint32_t>;
// Three channels; channel d at v is the edge (v, v + e_d), valued in [0, 1].
using AffinityGraph = Grid<float>;
// Three channels of +1 / -1 / 0 (unknown or boundary-invalid) edge labels.
using LabelMask = Grid<std::int8_t>;
// Binary per-voxel mask (0 / 1).
using VoxelMask = Grid<std::uint8_t>;

// Copies the sub-box `region` out of `grid` (all channels).
template <typename T>
Grid<T> crop(const Grid<T>& grid, const Box& region) {
  require(!region.empty() && grid.box().contains(region), "crop region outside grid: " + to_string(region));
  Grid<T> out(Dims{static_cast<std::size_t>(region.extent(0)), static_cast<std::size_t>(region.extent(1)),
                   static_cast<std::size_t>(region.extent(2))},
              grid.channels());
  const std::size_t row = static_cast<std::size_t>(region.extent(0)) * grid.channels();
  for (std::int64_t z = region.lo.z; z < region.hi.z; ++z)
    for (std::int64_t y = region.lo.y; y < region.hi.y; ++y) {
      const T* src = &grid(Coord{region.lo.x, y, z});
      T* dst = &out(0, static_cast<std::size_t>(y - region.lo.y), static_cast<std::size_t>(z - region.lo.z));
      std::copy(src, src + row, dst);
    }
  return out;
}

constexpr std::array<Coord, 3> kEdgeOffsets{Coord{1, 0, 0}, Coord{0, 1, 0}, Coord{0, 0, 1}};

inline Coord operator+(const Coord& a, const Coord& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Coord operator-(const Coord& a, const Coord& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

}  // namespace dawmr
