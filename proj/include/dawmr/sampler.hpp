#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dawmr/rng.hpp"

namespace dawmr {

// Draws training records alternately from two pools: records with at least
// one negative edge label, and records whose known labels are all positive.
// Records without any known label belong to neither pool. Within a pool a
// record is drawn with probability proportional to its weight.
class BalancedSampler {
 public:
  // `labels` is row-major n x 3 in {-1, 0, +1}; `weights` is empty (all 1)
  // or holds one multiplier >= 1 per record.
  BalancedSampler(std::span<const std::int8_t> labels, std::span<const float> weights, std::uint64_t seed);

  std::size_t next();
  void draw(std::span<std::size_t> out);

  const std::vector<std::size_t>& negative_pool() const { return pools_[0].records; }
  const std::vector<std::size_t>& positive_pool() const { return pools_[1].records; }

 private:
  struct Pool {
    std::vector<std::size_t> records;
    std::vector<double> cumulative;
  };
  std::size_t draw_from(const Pool& pool);

  Pool pools_[2];
  Rng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace dawmr
