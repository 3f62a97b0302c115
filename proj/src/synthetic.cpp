#include "dawmr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dawmr/rng.hpp"

namespace dawmr {

namespace {

void blur_axis(const Volume& in, Volume& out, const std::vector<double>& kernel, int axis) {
  const Dims d = in.dims();
  const auto radius = static_cast<std::int64_t>(kernel.size() / 2);
  const auto n = static_cast<std::int64_t>(d[axis]);
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        Coord p{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), static_cast<std::int64_t>(z)};
        const std::int64_t center = p[axis];
        double sum = 0.0;
        for (std::int64_t k = -radius; k <= radius; ++k) {
          p[axis] = std::clamp<std::int64_t>(center + k, 0, n - 1);
          sum += kernel[static_cast<std::size_t>(k + radius)] * in(p);
        }
        out(x, y, z) = static_cast<float>(sum);
      }
}

// Keeps the largest face-connected component of every id, clears the rest,
// and clears components below two voxels.
void keep_largest_components(SegmentationVolume& seg) {
  const Dims d = seg.dims();
  std::vector<std::int64_t> component(d.voxels(), -1);
  std::vector<std::size_t> sizes;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> stack;
  const auto& data = seg.storage();
  for (std::size_t start = 0; start < data.size(); ++start) {
    if (data[start] == 0 || component[start] >= 0) continue;
    const auto label = static_cast<std::int64_t>(sizes.size());
    std::size_t size = 0;
    stack.push_back(start);
    component[start] = label;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t x = v % d.x, y = (v / d.x) % d.y, z = v / (d.x * d.y);
      const std::size_t nbrs[6] = {x > 0 ? v - 1 : v,
                                   x + 1 < d.x ? v + 1 : v,
                                   y > 0 ? v - d.x : v,
                                   y + 1 < d.y ? v + d.x : v,
                                   z > 0 ? v - d.x * d.y : v,
                                   z + 1 < d.z ? v + d.x * d.y : v};
      for (std::size_t w : nbrs)
        if (w != v && component[w] < 0 && data[w] == data[start]) {
          component[w] = label;
          stack.push_back(w);
        }
    }
    sizes.push_back(size);
    ids.push_back(data[start]);
  }
  std::vector<std::int64_t> best(1 + *std::max_element(data.begin(), data.end()), -1);
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    auto& b = best[ids[c]];
    if (b < 0 || sizes[c] > sizes[static_cast<std::size_t>(b)]) b = static_cast<std::int64_t>(c);
  }
  auto& out = seg.storage();
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (out[v] == 0) continue;
    const auto c = static_cast<std::size_t>(component[v]);
    if (best[out[v]] != static_cast<std::int64_t>(c) || sizes[c] < 2) out[v] = 0;
  }
}

}  // namespace

Volume gaussian_blur(const Volume& vol, double sigma) {
  require(sigma >= 0.0, "blur sigma must be >= 0");
  if (sigma == 0.0) return vol;
  require(vol.channels() == 1, "gaussian_blur expects one channel");
  const auto radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += kernel[static_cast<std::size_t>(k + radius)];
  }
  for (double& w : kernel) w /= total;
  Volume a = vol, b(vol.dims(), 1);
  blur_axis(a, b, kernel, 0);
  blur_axis(b, a, kernel, 1);
  blur_axis(a, b, kernel, 2);
  return b;
}

SyntheticVolume generate_synthetic(const SyntheticParams& p) {
  require(p.num_seeds >= 1, "num_seeds must be >= 1");
  require(p.dims.x >= 8 && p.dims.y >= 8 && p.dims.z >= 8, "synthetic dims must each be >= 8");
  require(p.boundary_width >= 0.0, "boundary_width must be >= 0");
  require(p.noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require(p.blur_sigma >= 0.0, "blur_sigma must be >= 0");
  require(p.faint_contrast >= 0.0 && p.faint_contrast <= 1.0, "faint_contrast must be in [0, 1]");

  Rng rng(p.seed);
  SyntheticVolume out{Volume(p.dims, 1), SegmentationVolume(p.dims, 1), {}};
  for (int i = 0; i < p.num_seeds; ++i)
    out.seeds.push_back({rng.uniform(0.0, static_cast<double>(p.dims.x)), rng.uniform(0.0, static_cast<double>(p.dims.y)),
                         rng.uniform(0.0, static_cast<double>(p.dims.z))});

  const auto& seeds = out.seeds;
  for (std::size_t z = 0; z < p.dims.z; ++z)
    for (std::size_t y = 0; y < p.dims.y; ++y)
      for (std::size_t x = 0; x < p.dims.x; ++x) {
        const double pos[3] = {x + 0.5, y + 0.5, z + 0.5};
        std::vector<double> dist2(seeds.size());
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
          double s = 0.0;
          for (int a = 0; a < 3; ++a) s += (pos[a] - seeds[i][a]) * (pos[a] - seeds[i][a]);
          dist2[i] = s;
          if (s < dist2[nearest]) nearest = i;
        }
        // Distance to the nearest bisector plane bounding this cell.
        double wall = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < seeds.size(); ++j) {
          if (j == nearest) continue;
          double sep2 = 0.0;
          for (int a = 0; a < 3; ++a) sep2 += (seeds[j][a] - seeds[nearest][a]) * (seeds[j][a] - seeds[nearest][a]);
          if (sep2 == 0.0) continue;
          wall = std::min(wall, (dist2[j] - dist2[nearest]) / (2.0 * std::sqrt(sep2)));
        }
        out.truth(x, y, z) = wall < p.boundary_width ? 0u : static_cast<std::uint32_t>(nearest + 1);
      }
  keep_largest_components(out.truth);

  for (std::size_t z = 0; z < p.dims.z; ++z)
    for (std::size_t y = 0; y < p.dims.y; ++y)
      for (std::size_t x = 0; x < p.dims.x; ++x) {
        const Coord c{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), static_cast<std::int64_t>(z)};
        float bright = p.interior_level;
        if (p.faint_region && p.faint_region->contains(c))
          bright = static_cast<float>(p.boundary_level + (p.interior_level - p.boundary_level) * p.faint_contrast);
        out.image(c) = out.truth(c) != 0 ? bright : p.boundary_level;
      }
  out.image = gaussian_blur(out.image, p.blur_sigma);
  if (p.noise_sigma > 0.0)
    for (float& v : out.image.storage()) v += static_cast<float>(p.noise_sigma * rng.gaussian());
  return out;
}

}  // namespace dawmr
