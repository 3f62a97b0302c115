#include "dawmr/transform.hpp"

#include <algorithm>
#include <cstdint>

namespace dawmr {

Volume downsample_average(const Volume& vol, int factor) {
  require(factor >= 1, "downsample factor must be >= 1");
  if (factor == 1) return vol;
  const std::size_t f = static_cast<std::size_t>(factor);
  const Dims in = vol.dims();
  const Dims out_dims{in.x / f, in.y / f, in.z / f};
  require(out_dims.x >= 1 && out_dims.y >= 1 && out_dims.z >= 1,
          "downsample factor " + std::to_string(factor) + " leaves an empty volume");
  const std::size_t channels = vol.channels();
  Volume out(out_dims, channels);
  const double inv = 1.0 / static_cast<double>(f * f * f);
  for (std::size_t z = 0; z < out_dims.z; ++z)
    for (std::size_t y = 0; y < out_dims.y; ++y)
      for (std::size_t x = 0; x < out_dims.x; ++x)
        for (std::size_t c = 0; c < channels; ++c) {
          double sum = 0.0;
          for (std::size_t dz = 0; dz < f; ++dz)
            for (std::size_t dy = 0; dy < f; ++dy)
              for (std::size_t dx = 0; dx < f; ++dx) sum += vol(x * f + dx, y * f + dy, z * f + dz, c);
          out(x, y, z, c) = static_cast<float>(sum * inv);
        }
  return out;
}

std::vector<PlaneTransform> plane_group() {
  std::vector<PlaneTransform> group;
  for (bool reflect : {false, true})
    for (int r = 0; r < 4; ++r) group.push_back({r, reflect});
  return group;
}

namespace {

template <typename T>
Grid<T> rotate_quarter(const Grid<T>& in) {
  const Dims d = in.dims();
  Grid<T> out(Dims{d.y, d.x, d.z}, in.channels());
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t c = 0; c < in.channels(); ++c) out(d.y - 1 - y, x, z, c) = in(x, y, z, c);
  return out;
}

template <typename T>
Grid<T> reflect_y(const Grid<T>& in) {
  const Dims d = in.dims();
  Grid<T> out(d, in.channels());
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t c = 0; c < in.channels(); ++c) out(x, d.y - 1 - y, z, c) = in(x, y, z, c);
  return out;
}

}  // namespace

template <typename T>
Grid<T> apply_transform(const Grid<T>& in, PlaneTransform t) {
  require(t.rotation >= 0 && t.rotation < 4, "rotation must be in 0..3");
  Grid<T> out = t.reflect ? reflect_y(in) : in;
  for (int r = 0; r < t.rotation; ++r) out = rotate_quarter(out);
  return out;
}

template Grid<float> apply_transform(const Grid<float>&, PlaneTransform);
template Grid<std::uint32_t> apply_transform(const Grid<std::uint32_t>&, PlaneTransform);
template Grid<std::uint8_t> apply_transform(const Grid<std::uint8_t>&, PlaneTransform);

Box transform_box(const Box& box, const Dims& dims, PlaneTransform t) {
  require(t.rotation >= 0 && t.rotation < 4, "rotation must be in 0..3");
  if (box.empty()) return box;
  Coord a = box.lo, b{box.hi.x - 1, box.hi.y - 1, box.hi.z - 1};
  auto w = static_cast<std::int64_t>(dims.x), h = static_cast<std::int64_t>(dims.y);
  if (t.reflect) {
    a.y = h - 1 - a.y;
    b.y = h - 1 - b.y;
  }
  for (int r = 0; r < t.rotation; ++r) {
    a = {h - 1 - a.y, a.x, a.z};
    b = {h - 1 - b.y, b.x, b.z};
    std::swap(w, h);
  }
  Box out;
  for (int axis = 0; axis < 3; ++axis) {
    out.lo[axis] = std::min(a[axis], b[axis]);
    out.hi[axis] = std::max(a[axis], b[axis]) + 1;
  }
  return out;
}

std::vector<AugmentedPair> augment_eightfold(const SegmentationVolume& seg, const Volume& img) {
  require(img.channels() == 1, "augmentation expects a single-channel image");
  require(seg.dims() == img.dims(), "image and segmentation dims differ");
  std::vector<AugmentedPair> out;
  out.reserve(8);
  for (const PlaneTransform& t : plane_group()) out.push_back({apply_transform(img, t), apply_transform(seg, t)});
  return out;
}

}  // namespace dawmr
