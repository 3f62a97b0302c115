#include "dawmr/sampler.hpp"

#include <algorithm>

#include "dawmr/common.hpp"

namespace dawmr {

BalancedSampler::BalancedSampler(std::span<const std::int8_t> labels, std::span<const float> weights,
                                 std::uint64_t seed)
    : rng_(seed) {
  require(labels.size() % 3 == 0, "labels must hold three edges per record");
  const std::size_t n = labels.size() / 3;
  require(weights.empty() || weights.size() == n, "one sampling weight per record is required");
  for (std::size_t i = 0; i < n; ++i) {
    bool negative = false, known = false;
    for (std::size_t e = 0; e < 3; ++e) {
      negative = negative || labels[i * 3 + e] < 0;
      known = known || labels[i * 3 + e] != 0;
    }
    if (!known) continue;
    const double w = weights.empty() ? 1.0 : static_cast<double>(weights[i]);
    require(w >= 1.0, "sampling weights must be >= 1");
    Pool& pool = pools_[negative ? 0 : 1];
    pool.records.push_back(i);
    pool.cumulative.push_back((pool.cumulative.empty() ? 0.0 : pool.cumulative.back()) + w);
  }
  require(!pools_[0].records.empty() || !pools_[1].records.empty(), "no labeled training records");
}

std::size_t BalancedSampler::draw_from(const Pool& pool) {
  const double u = rng_.uniform() * pool.cumulative.back();
  const auto it = std::upper_bound(pool.cumulative.begin(), pool.cumulative.end(), u);
  const auto pos = std::min<std::size_t>(static_cast<std::size_t>(it - pool.cumulative.begin()),
                                         pool.records.size() - 1);
  return pool.records[pos];
}

std::size_t BalancedSampler::next() {
  std::size_t which = counter_++ % 2;
  if (pools_[which].records.empty()) which = 1 - which;
  return draw_from(pools_[which]);
}

void BalancedSampler::draw(std::span<std::size_t> out) {
  for (std::size_t& r : out) r = next();
}

}  // namespace dawmr
