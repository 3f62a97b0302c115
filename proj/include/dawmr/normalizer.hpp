#pragma once

#include <span>
#include <string>
#include <vector>

namespace dawmr {

// Per-dimension standardization h' = (h - mean) / std. Stored deviations are
// already floored at sigma_min.
struct FeatureNormalizer {
  double sigma_min = 1e-6;
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t dims() const { return mean.size(); }
  void apply(std::span<float> features) const;
  // Every row of a row-major n x dims() block.
  void apply_rows(std::span<float> rows) const;
  bool operator==(const FeatureNormalizer&) const = default;
};

// Population statistics over the rows of a row-major n x d sample.
FeatureNormalizer fit_normalizer(std::span<const float> rows, std::size_t d, double sigma_min = 1e-6);

// "DWNM", u32 version, u32 d, f64 sigma_min, d f64 means, d f64 deviations.
void write_normalizer(const FeatureNormalizer& n, const std::string& path);
FeatureNormalizer read_normalizer(const std::string& path);

}  // namespace dawmr
