#include "dawmr/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "dawmr/binio.hpp"

namespace dawmr {

namespace {
constexpr std::uint32_t kVersion = 1;
}

void FeatureNormalizer::apply(std::span<float> features) const {
  require(features.size() == mean.size(), "feature length does not match normalizer");
  for (std::size_t j = 0; j < features.size(); ++j)
    features[j] = static_cast<float>((static_cast<double>(features[j]) - mean[j]) / std[j]);
}

void FeatureNormalizer::apply_rows(std::span<float> rows) const {
  const std::size_t d = dims();
  require(d > 0 && rows.size() % d == 0, "feature block is not a whole number of rows");
  for (std::size_t i = 0; i < rows.size(); i += d) apply(rows.subspan(i, d));
}

FeatureNormalizer fit_normalizer(std::span<const float> rows, std::size_t d, double sigma_min) {
  require(d > 0 && rows.size() % d == 0, "feature sample is not a whole number of rows");
  const std::size_t n = rows.size() / d;
  require(n >= 2, "normalizer needs at least two samples");
  require(sigma_min > 0.0, "sigma_min must be positive");
  FeatureNormalizer out;
  out.sigma_min = sigma_min;
  out.mean.assign(d, 0.0);
  out.std.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += rows[i * d + j];
  for (double& m : out.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = rows[i * d + j] - out.mean[j];
      out.std[j] += c * c;
    }
  for (double& s : out.std) s = std::max(std::sqrt(s / static_cast<double>(n)), sigma_min);
  return out;
}

void write_normalizer(const FeatureNormalizer& n, const std::string& path) {
  binio::Writer w(path);
  w.magic("DWNM");
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(n.dims()));
  w.put<double>(n.sigma_min);
  w.put_array<double>(n.mean);
  w.put_array<double>(n.std);
  w.close();
}

FeatureNormalizer read_normalizer(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("DWNM");
  if (r.get<std::uint32_t>() != kVersion) throw FormatError(path + ": unsupported normalizer version");
  const auto d = r.get<std::uint32_t>();
  FeatureNormalizer n;
  n.sigma_min = r.get<double>();
  n.mean = r.get_array<double>(d);
  n.std = r.get_array<double>(d);
  for (double s : n.std)
    if (!(s >= n.sigma_min && n.sigma_min > 0.0)) throw FormatError(path + ": invalid deviation");
  return n;
}

}  // namespace dawmr
