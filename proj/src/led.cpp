#include "dawmr/led.hpp"

#include <algorithm>
#include <vector>

namespace dawmr {

namespace {

// Inclusive 3D prefix sums with a zero border: S(x+1, y+1, z+1) = sum over [0..x]x[0..y]x[0..z].
class SummedVolume {
 public:
  explicit SummedVolume(const Dims& d) : X(d.x + 1), Y(d.y + 1), Z(d.z + 1), s_(X * Y * Z, 0) {}

  std::int64_t& at(std::size_t x, std::size_t y, std::size_t z) { return s_[(z * Y + y) * X + x]; }
  std::int64_t at(std::size_t x, std::size_t y, std::size_t z) const { return s_[(z * Y + y) * X + x]; }

  void integrate() {
    for (std::size_t z = 1; z < Z; ++z)
      for (std::size_t y = 1; y < Y; ++y)
        for (std::size_t x = 1; x < X; ++x)
          at(x, y, z) += at(x - 1, y, z) + at(x, y - 1, z) + at(x, y, z - 1) - at(x - 1, y - 1, z) -
                         at(x - 1, y, z - 1) - at(x, y - 1, z - 1) + at(x - 1, y - 1, z - 1);
  }

  // Sum over the half-open box [lo, hi).
  std::int64_t sum(const Box& b) const {
    const auto x0 = static_cast<std::size_t>(b.lo.x), y0 = static_cast<std::size_t>(b.lo.y),
               z0 = static_cast<std::size_t>(b.lo.z);
    const auto x1 = static_cast<std::size_t>(b.hi.x), y1 = static_cast<std::size_t>(b.hi.y),
               z1 = static_cast<std::size_t>(b.hi.z);
    return at(x1, y1, z1) - at(x0, y1, z1) - at(x1, y0, z1) - at(x1, y1, z0) + at(x0, y0, z1) + at(x0, y1, z0) +
           at(x1, y0, z0) - at(x0, y0, z0);
  }

 private:
  std::size_t X, Y, Z;
  std::vector<std::int64_t> s_;
};

}  // namespace

VoxelMask compute_led_mask(const AffinityGraph& pred, const LabelMask& truth, const LedOptions& options,
                           const Box& region) {
  require(pred.dims() == truth.dims() && pred.channels() == 3 && truth.channels() == 3,
          "prediction and labels must be aligned 3-channel volumes");
  for (int w : options.window) require(w >= 1 && w % 2 == 1, "LED window sides must be odd");
  require(options.frac >= 0.0 && options.frac < 1.0, "LED fraction must be in [0, 1)");
  const Dims d = pred.dims();
  SummedVolume wrong(d), total(d);
  const Box counted = region.intersect(Box::of(d));
  for (std::int64_t z = counted.lo.z; z < counted.hi.z; ++z)
    for (std::int64_t y = counted.lo.y; y < counted.hi.y; ++y)
      for (std::int64_t x = counted.lo.x; x < counted.hi.x; ++x) {
        const Coord v{x, y, z};
        std::int64_t n = 0, bad = 0;
        for (std::size_t c = 0; c < 3; ++c) {
          const std::int8_t label = truth(v, c);
          if (label == 0) continue;
          ++n;
          bad += (pred(v, c) > 0.5f) != (label > 0);
        }
        const auto ux = static_cast<std::size_t>(x) + 1, uy = static_cast<std::size_t>(y) + 1,
                   uz = static_cast<std::size_t>(z) + 1;
        total.at(ux, uy, uz) = n;
        wrong.at(ux, uy, uz) = bad;
      }
  total.integrate();
  wrong.integrate();

  VoxelMask mask(d, 1, 0);
  const Box all = Box::of(d);
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        Box win;
        const Coord v{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), static_cast<std::int64_t>(z)};
        for (int a = 0; a < 3; ++a) {
          const int h = options.window[static_cast<std::size_t>(a)] / 2;
          win.lo[a] = v[a] - h;
          win.hi[a] = v[a] + h + 1;
        }
        win = win.intersect(all);
        const std::int64_t n = total.sum(win);
        if (n == 0) continue;
        mask(x, y, z) = static_cast<double>(wrong.sum(win)) > options.frac * static_cast<double>(n) ? 1 : 0;
      }
  return mask;
}

VoxelMask compute_led_mask(const AffinityGraph& pred, const LabelMask& truth, const LedOptions& options) {
  return compute_led_mask(pred, truth, options, pred.box());
}

VoxelMask merge_masks(const VoxelMask& a, const VoxelMask& b) {
  require(a.dims() == b.dims() && a.channels() == b.channels(), "LED masks are not aligned");
  VoxelMask out = a;
  auto& o = out.storage();
  const auto& bs = b.storage();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] != 0 || bs[i] != 0) ? 1 : 0;
  return out;
}

}  // namespace dawmr
