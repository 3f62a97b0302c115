#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dawmr/volume.hpp"

namespace dawmr {

enum class InputGroup : std::uint8_t { image = 0, affinity = 1 };

struct PatchSpec {
  std::array<int, 3> size{5, 5, 5};  // odd side lengths (x, y, z)

  std::size_t voxels() const { return static_cast<std::size_t>(size[0] * size[1] * size[2]); }
  int half(int axis) const { return size[axis] / 2; }
  void validate() const;
  bool operator==(const PatchSpec&) const = default;
};

// Rows of equal-length flattened patches.
struct PatchSet {
  std::size_t dim = 0;
  std::vector<float> values;

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<float> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

// Box of voxels read by a patch centred at `center`.
Box patch_box(const PatchSpec& spec, const Coord& center);

// Copies the patch centred at `center` (all channels) in grid index order.
// The patch must lie inside the volume; there is no implicit padding.
void extract_patch_into(const Volume& vol, const Coord& center, const PatchSpec& spec, std::span<float> out);
std::vector<float> extract_patch(const Volume& vol, const Coord& center, const PatchSpec& spec);

}  // namespace dawmr
