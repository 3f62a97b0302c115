#pragma once

// Dense encoding kernels. encode_region is the OpenMP version used in
// production; encode_region_serial is the single-threaded reference kept for
// equivalence tests and benchmarks. Both produce bit-identical maps.

#include <span>
#include <vector>

#include "dawmr/dictionary.hpp"
#include "dawmr/volume.hpp"

namespace dawmr {

// Encodings for every voxel centre in `region`, laid out in scan order.
struct EncodingMap {
  Box region;
  std::size_t length = 0;
  std::vector<float> values;

  std::size_t offset(const Coord& c) const {
    const auto w = region.extent(0), h = region.extent(1);
    const auto i = ((c.z - region.lo.z) * h + (c.y - region.lo.y)) * w + (c.x - region.lo.x);
    return static_cast<std::size_t>(i) * length;
  }
  const float* at(const Coord& c) const { return values.data() + offset(c); }
  float* at(const Coord& c) { return values.data() + offset(c); }
};

// Box of centres whose patches fit entirely inside `dims`.
Box patch_centre_box(const PatchSpec& patch, const Dims& dims);

EncodingMap encode_region(const Dictionary& dict, const EncoderConfig& encoder, const Volume& input,
                          const Box& region, int threads = 0);
EncodingMap encode_region_serial(const Dictionary& dict, const EncoderConfig& encoder, const Volume& input,
                                 const Box& region);

// Element-wise max or mean over `rows` (each `out.size()` long). Rows are
// folded in the order given.
enum class PoolingMode : std::uint8_t { max = 0, average = 1 };
void pool_rows(std::span<const float* const> rows, PoolingMode mode, std::span<float> out);
// Same, over `count` contiguous rows of length `out.size()`.
void pool(std::span<const float> encodings, PoolingMode mode, std::span<float> out);

}  // namespace dawmr
