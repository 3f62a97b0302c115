#include "dawmr/patch.hpp"

#include <algorithm>

namespace dawmr {

void PatchSpec::validate() const {
  for (int s : size) require(s >= 1 && s % 2 == 1, "patch sides must be odd and >= 1");
}

Box patch_box(const PatchSpec& spec, const Coord& center) {
  Box b;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = center[a] - spec.half(a);
    b.hi[a] = center[a] + spec.half(a) + 1;
  }
  return b;
}

void extract_patch_into(const Volume& vol, const Coord& center, const PatchSpec& spec, std::span<float> out) {
  const Box b = patch_box(spec, center);
  if (!vol.box().contains(b)) throw ValidationError("patch " + to_string(b) + " falls outside the volume");
  const std::size_t c = vol.channels();
  const std::size_t row = static_cast<std::size_t>(spec.size[0]) * c;
  require(out.size() == spec.voxels() * c, "patch buffer has the wrong length");
  float* dst = out.data();
  for (std::int64_t z = b.lo.z; z < b.hi.z; ++z)
    for (std::int64_t y = b.lo.y; y < b.hi.y; ++y) {
      const float* src = &vol(Coord{b.lo.x, y, z});
      std::copy(src, src + row, dst);
      dst += row;
    }
}

std::vector<float> extract_patch(const Volume& vol, const Coord& center, const PatchSpec& spec) {
  std::vector<float> out(spec.voxels() * vol.channels());
  extract_patch_into(vol, center, spec, out);
  return out;
}

}  // namespace dawmr
