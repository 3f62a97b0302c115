#include "dawmr/volume_io.hpp"

#include <fstream>
#include <limits>

#include "dawmr/binio.hpp"

namespace dawmr {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFloat32 = 1;
constexpr std::uint32_t kUint32 = 2;

template <typename T>
void write_grid(const Grid<T>& grid, std::uint32_t dtype, const std::string& path) {
  binio::Writer w(path);
  w.magic("DWMR");
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(grid.dims().x);
  w.put<std::uint64_t>(grid.dims().y);
  w.put<std::uint64_t>(grid.dims().z);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.channels()));
  w.put<std::uint32_t>(dtype);
  w.put_array<T>(grid.data());
  w.close();
}

template <typename T>
Grid<T> read_grid(std::uint32_t expected_dtype, const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("DWMR");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw FormatError(path + ": unsupported volume version " + std::to_string(version));
  const auto x = r.get<std::uint64_t>();
  const auto y = r.get<std::uint64_t>();
  const auto z = r.get<std::uint64_t>();
  const auto c = r.get<std::uint32_t>();
  const auto dtype = r.get<std::uint32_t>();
  if (dtype != expected_dtype)
    throw FormatError(path + ": dtype " + std::to_string(dtype) + ", expected " + std::to_string(expected_dtype));
  if (x == 0 || y == 0 || z == 0 || c == 0) throw FormatError(path + ": zero dimension in header");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max() / sizeof(T);
  std::uint64_t count = x;
  for (std::uint64_t factor : {y, z, static_cast<std::uint64_t>(c)}) {
    if (count > kMax / factor) throw FormatError(path + ": dims overflow");
    count *= factor;
  }
  if (count * sizeof(T) != r.remaining()) throw FormatError(path + ": truncated or oversized payload");
  auto data = r.get_array<T>(count);
  return Grid<T>(Dims{x, y, z}, c, std::move(data));
}

}  // namespace

void write_volume(const Volume& vol, const std::string& path) { write_grid(vol, kFloat32, path); }

void write_segmentation(const SegmentationVolume& seg, const std::string& path) {
  require(seg.channels() == 1, "segmentation files hold exactly one channel");
  write_grid(seg, kUint32, path);
}

Volume read_volume(const std::string& path) { return read_grid<float>(kFloat32, path); }

SegmentationVolume read_segmentation(const std::string& path) {
  auto seg = read_grid<std::uint32_t>(kUint32, path);
  if (seg.channels() != 1) throw FormatError(path + ": segmentation must have C = 1");
  return seg;
}

void write_box(const Box& box, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << box.lo.x << ' ' << box.lo.y << ' ' << box.lo.z << ' ' << box.hi.x << ' ' << box.hi.y << ' ' << box.hi.z
      << '\n';
}

Box read_box(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Box b;
  if (!(in >> b.lo.x >> b.lo.y >> b.lo.z >> b.hi.x >> b.hi.y >> b.hi.z)) throw FormatError(path + ": malformed box");
  return b;
}

}  // namespace dawmr
