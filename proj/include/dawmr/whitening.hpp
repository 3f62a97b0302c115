#pragma once

#include <span>
#include <vector>

#include "dawmr/patch.hpp"

namespace dawmr {

struct WhiteningOptions {
  bool contrast_normalize = true;
  double eps_zca = 0.1;
  double eps_cn = 1.0;  // on a 0-255 intensity scale
};

// Optional contrast normalization followed by ZCA whitening,
// x -> W (x - mean) with W = E diag((lambda + eps_zca)^-1/2) E^T.
// A disabled transform is the identity.
struct WhiteningTransform {
  bool enabled = false;
  bool contrast_normalize = true;
  double eps_zca = 0.1;
  double eps_cn = 1.0;
  std::size_t dim = 0;
  std::vector<double> mean;    // dim
  std::vector<double> matrix;  // dim x dim, symmetric

  // In place; `scratch` must hold at least `dim` doubles.
  void apply(std::span<float> patch, std::span<double> scratch) const;
  std::vector<float> apply(std::span<const float> patch) const;
};

// Per-patch mean removal and division by (std + eps_cn).
void contrast_normalize(std::span<float> patch, double eps_cn);

WhiteningTransform fit_whitening(const PatchSet& patches, const WhiteningOptions& options);

}  // namespace dawmr
