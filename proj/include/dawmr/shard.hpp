#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dawmr/extractor.hpp"

namespace dawmr {

// Location plus its three edge labels.
struct LabeledLocation {
  Coord coord;
  std::array<std::int8_t, 3> labels{0, 0, 0};
  bool operator==(const LabeledLocation&) const = default;
};

// Records sharing one feature length d.
struct FeatureShard {
  std::size_t d = 0;
  std::vector<LabeledLocation> records;
  std::vector<float> features;  // records.size() x d

  std::size_t size() const { return records.size(); }
  std::span<const float> row(std::size_t i) const { return {features.data() + i * d, d}; }
  void append(const FeatureShard& other);
  bool operator==(const FeatureShard&) const = default;
};

// Shard file: "DWFS", u32 version, u32 d, u64 count, then per record
// 3 x u32 coordinates, 3 x i8 labels, one zero pad byte and d f32 features.
inline constexpr std::size_t kShardHeaderBytes = 20;
inline constexpr std::size_t shard_record_bytes(std::size_t d) { return 12 + 3 + 1 + 4 * d; }

void write_shard(const FeatureShard& shard, const std::string& path);
FeatureShard read_shard(const std::string& path);

// Sorts locations by linear index (z, y, x) and deals them round-robin into
// `shard_count` shards. Features are computed once for all locations with
// `workers` threads; every shard is identical for any worker count.
std::vector<FeatureShard> precompute_features(const FeatureExtractor& extractor, const ScaledInputs& inputs,
                                              std::vector<LabeledLocation> locations, std::size_t shard_count,
                                              int workers = 1);

// Concatenation of shards, re-sorted by linear index.
FeatureShard merge_shards(const std::vector<FeatureShard>& shards);

}  // namespace dawmr
