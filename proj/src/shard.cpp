#include "dawmr/shard.hpp"

#include <algorithm>
#include <numeric>

#include "dawmr/binio.hpp"

namespace dawmr {

namespace {

constexpr std::uint32_t kVersion = 1;

bool scan_less(const Coord& a, const Coord& b) {
  if (a.z != b.z) return a.z < b.z;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

}  // namespace

void FeatureShard::append(const FeatureShard& other) {
  if (records.empty() && d == 0) d = other.d;
  require(other.d == d, "cannot append shards with different feature lengths");
  records.insert(records.end(), other.records.begin(), other.records.end());
  features.insert(features.end(), other.features.begin(), other.features.end());
}

void write_shard(const FeatureShard& shard, const std::string& path) {
  require(shard.features.size() == shard.records.size() * shard.d, "shard features do not match its records");
  binio::Writer w(path);
  w.magic("DWFS");
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(shard.d));
  w.put<std::uint64_t>(shard.records.size());
  for (std::size_t i = 0; i < shard.records.size(); ++i) {
    const LabeledLocation& r = shard.records[i];
    for (int a = 0; a < 3; ++a) {
      require(r.coord[a] >= 0 && r.coord[a] <= INT64_C(0xffffffff), "record coordinate out of u32 range");
      w.put<std::uint32_t>(static_cast<std::uint32_t>(r.coord[a]));
    }
    for (std::int8_t l : r.labels) w.put<std::int8_t>(l);
    w.put<std::uint8_t>(0);
    w.put_array<float>(shard.row(i));
  }
  w.close();
}

FeatureShard read_shard(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("DWFS");
  if (r.get<std::uint32_t>() != kVersion) throw FormatError(path + ": unsupported shard version");
  FeatureShard s;
  s.d = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  if (s.d == 0 || count > r.remaining() / shard_record_bytes(s.d)) throw FormatError(path + ": truncated payload");
  s.records.resize(count);
  s.features.resize(count * s.d);
  for (std::uint64_t i = 0; i < count; ++i) {
    LabeledLocation& rec = s.records[i];
    for (int a = 0; a < 3; ++a) rec.coord[a] = r.get<std::uint32_t>();
    for (std::int8_t& l : rec.labels) {
      l = r.get<std::int8_t>();
      if (l < -1 || l > 1) throw FormatError(path + ": label out of range");
    }
    r.get<std::uint8_t>();
    const auto row = r.get_array<float>(s.d);
    std::copy(row.begin(), row.end(), s.features.begin() + static_cast<std::ptrdiff_t>(i * s.d));
  }
  if (r.remaining() != 0) throw FormatError(path + ": trailing bytes");
  return s;
}

std::vector<FeatureShard> precompute_features(const FeatureExtractor& extractor, const ScaledInputs& inputs,
                                              std::vector<LabeledLocation> locations, std::size_t shard_count,
                                              int workers) {
  require(shard_count >= 1, "shard_count must be >= 1");
  std::stable_sort(locations.begin(), locations.end(),
                   [](const LabeledLocation& a, const LabeledLocation& b) { return scan_less(a.coord, b.coord); });
  std::vector<Coord> coords;
  coords.reserve(locations.size());
  for (const LabeledLocation& l : locations) coords.push_back(l.coord);
  const std::vector<float> features = extractor.extract_batch(inputs, coords, workers);

  const std::size_t d = extractor.dims();
  std::vector<FeatureShard> shards(shard_count);
  for (FeatureShard& s : shards) s.d = d;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    FeatureShard& s = shards[i % shard_count];
    s.records.push_back(locations[i]);
    s.features.insert(s.features.end(), features.begin() + static_cast<std::ptrdiff_t>(i * d),
                      features.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  }
  return shards;
}

FeatureShard merge_shards(const std::vector<FeatureShard>& shards) {
  FeatureShard all;
  for (const FeatureShard& s : shards) all.append(s);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scan_less(all.records[a].coord, all.records[b].coord);
  });
  FeatureShard out;
  out.d = all.d;
  out.records.reserve(all.size());
  out.features.reserve(all.features.size());
  for (std::size_t i : order) {
    out.records.push_back(all.records[i]);
    const auto row = all.row(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace dawmr
