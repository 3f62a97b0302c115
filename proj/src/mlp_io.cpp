#include <algorithm>

#include "dawmr/binio.hpp"
#include "dawmr/mlp.hpp"

namespace dawmr {

namespace {
constexpr std::uint32_t kVersion = 1;
}

std::vector<float> predict(const Mlp& mlp, std::span<const float> features, int workers) {
  const std::size_t d = mlp.input_dim(), k = mlp.output_dim();
  require(features.size() % d == 0, "feature block length does not match the MLP input");
  const auto n = static_cast<std::int64_t>(features.size() / d);
  std::vector<float> out(static_cast<std::size_t>(n) * k);
#pragma omp parallel num_threads(std::max(1, workers))
  {
    ForwardPass<float> pass;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto row = static_cast<std::size_t>(i);
      forward(mlp, features.subspan(row * d, d), nullptr, pass);
      std::copy(pass.activations.back().begin(), pass.activations.back().end(), out.begin() + row * k);
    }
  }
  return out;
}

void write_mlp(const Mlp& mlp, const std::string& path) {
  binio::Writer w(path);
  w.magic("DWMP");
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(mlp.layers()));
  for (std::size_t s : mlp.sizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  w.put<double>(mlp.dropout_hidden);
  w.put<double>(mlp.dropout_input);
  w.put<double>(mlp.inverse_margin);
  for (std::size_t l = 0; l < mlp.layers(); ++l) {
    w.put_array<float>(mlp.weights[l]);
    w.put_array<float>(mlp.biases[l]);
  }
  w.close();
}

Mlp read_mlp(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("DWMP");
  if (r.get<std::uint32_t>() != kVersion) throw FormatError(path + ": unsupported MLP version");
  const auto layers = r.get<std::uint32_t>();
  if (layers == 0 || layers > 64) throw FormatError(path + ": implausible layer count");
  std::vector<std::size_t> sizes;
  for (std::uint32_t l = 0; l <= layers; ++l) {
    const auto s = r.get<std::uint32_t>();
    if (s == 0) throw FormatError(path + ": zero layer size");
    sizes.push_back(s);
  }
  Mlp m;
  m.sizes = sizes;
  m.dropout_hidden = r.get<double>();
  m.dropout_input = r.get<double>();
  m.inverse_margin = r.get<double>();
  for (std::uint32_t l = 0; l < layers; ++l) {
    m.weights.push_back(r.get_array<float>(std::uint64_t{sizes[l]} * sizes[l + 1]));
    m.biases.push_back(r.get_array<float>(sizes[l + 1]));
  }
  if (r.remaining() != 0) throw FormatError(path + ": trailing bytes");
  return m;
}

}  // namespace dawmr
