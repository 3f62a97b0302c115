#include "dawmr/encoding_kernels.hpp"

#include <algorithm>

#include <omp.h>

namespace dawmr {

Box patch_centre_box(const PatchSpec& patch, const Dims& dims) {
  Box b;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = patch.half(a);
    b.hi[a] = std::max<std::int64_t>(b.lo[a], static_cast<std::int64_t>(dims[a]) - patch.half(a));
  }
  return b;
}

namespace {

EncodingMap allocate_map(const Dictionary& dict, const EncoderConfig& encoder, const Volume& input,
                         const Box& region) {
  require(input.channels() == dict.channels(), "input channel count does not match dictionary");
  require(region.empty() || patch_centre_box(dict.patch(), input.dims()).contains(region),
          "encoding region " + to_string(region) + " lacks patch support");
  EncodingMap map;
  map.region = region;
  map.length = encoder.output_dim(dict.k());
  map.values.assign(region.voxels() * map.length, 0.0f);
  return map;
}

// Encodes one scan row (fixed y, z) of the region.
void encode_row(const Dictionary& dict, const EncoderConfig& encoder, const Volume& input, EncodingMap& map,
                std::int64_t y, std::int64_t z, std::vector<float>& patch, EncodeScratch& scratch) {
  for (std::int64_t x = map.region.lo.x; x < map.region.hi.x; ++x) {
    const Coord c{x, y, z};
    extract_patch_into(input, c, dict.patch(), patch);
    float* dst = map.at(c);
    encode_into(dict, encoder, patch, {dst, map.length}, scratch);
  }
}

}  // namespace

EncodingMap encode_region(const Dictionary& dict, const EncoderConfig& encoder, const Volume& input,
                          const Box& region, int threads) {
  EncodingMap map = allocate_map(dict, encoder, input, region);
  if (region.empty()) return map;
  const std::int64_t rows_y = region.extent(1);
  const std::int64_t rows = rows_y * region.extent(2);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
  {
    std::vector<float> patch(dict.dim());
    EncodeScratch scratch;
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r)
      encode_row(dict, encoder, input, map, region.lo.y + r % rows_y, region.lo.z + r / rows_y, patch, scratch);
  }
  return map;
}

EncodingMap encode_region_serial(const Dictionary& dict, const EncoderConfig& encoder, const Volume& input,
                                 const Box& region) {
  EncodingMap map = allocate_map(dict, encoder, input, region);
  std::vector<float> patch(dict.dim());
  EncodeScratch scratch;
  for (std::int64_t z = region.lo.z; z < region.hi.z; ++z)
    for (std::int64_t y = region.lo.y; y < region.hi.y; ++y) encode_row(dict, encoder, input, map, y, z, patch, scratch);
  return map;
}

void pool_rows(std::span<const float* const> rows, PoolingMode mode, std::span<float> out) {
  require(!rows.empty(), "pooling over an empty neighborhood");
  const std::size_t len = out.size();
  std::copy(rows[0], rows[0] + len, out.begin());
  if (mode == PoolingMode::max) {
    for (std::size_t r = 1; r < rows.size(); ++r)
      for (std::size_t j = 0; j < len; ++j) out[j] = std::max(out[j], rows[r][j]);
  } else {
    for (std::size_t r = 1; r < rows.size(); ++r)
      for (std::size_t j = 0; j < len; ++j) out[j] += rows[r][j];
    const float n = static_cast<float>(rows.size());
    for (float& v : out) v /= n;
  }
}

void pool(std::span<const float> encodings, PoolingMode mode, std::span<float> out) {
  const std::size_t len = out.size();
  require(len > 0 && encodings.size() % len == 0, "pooling input is not a whole number of encodings");
  std::vector<const float*> rows;
  for (std::size_t i = 0; i < encodings.size(); i += len) rows.push_back(encodings.data() + i);
  pool_rows(rows, mode, out);
}

}  // namespace dawmr
