#pragma once

#include <string>

#include "dawmr/volume.hpp"

namespace dawmr {

// Volume file: "DWMR", u32 version (1), u64 X, u64 Y, u64 Z, u32 C,
// u32 dtype (1 = f32, 2 = u32 ids), then the payload in grid index order.
// Little-endian; the header is 40 bytes.
inline constexpr std::size_t kVolumeHeaderBytes = 40;

void write_volume(const Volume& vol, const std::string& path);
void write_segmentation(const SegmentationVolume& seg, const std::string& path);

Volume read_volume(const std::string& path);
SegmentationVolume read_segmentation(const std::string& path);

// Valid-region sidecar for prediction files ("x0 y0 z0 x1 y1 z1").
void write_box(const Box& box, const std::string& path);
Box read_box(const std::string& path);

}  // namespace dawmr
