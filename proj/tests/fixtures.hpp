#pragma once

// Random models and inputs shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "dawmr/extractor.hpp"
#include "dawmr/iteration.hpp"
#include "dawmr/recursive.hpp"
#include "dawmr/rng.hpp"

namespace fixtures {

using namespace dawmr;

inline Dictionary random_dictionary(const PatchSpec& patch, std::size_t channels, std::size_t k, Rng& rng) {
  const std::size_t dim = patch.voxels() * channels;
  std::vector<float> atoms(k * dim);
  for (std::size_t j = 0; j < k; ++j) {
    double norm = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double v = rng.gaussian();
      atoms[j * dim + i] = static_cast<float>(v);
      norm += v * v;
    }
    for (std::size_t i = 0; i < dim; ++i) atoms[j * dim + i] = static_cast<float>(atoms[j * dim + i] / std::sqrt(norm));
  }
  return Dictionary(patch, channels, DictionaryMethod::omp1, std::move(atoms));
}

inline std::vector<Dictionary> random_dictionaries(const ExtractorSpec& spec, Rng& rng) {
  std::vector<Dictionary> dicts;
  for (std::size_t s = 0; s < spec.scales.size(); ++s)
    for (const auto& g : spec.groups) dicts.push_back(random_dictionary(spec.patch, g.channels, g.dict_size, rng));
  return dicts;
}

inline FeatureExtractor random_extractor(const ExtractorSpec& spec, Rng& rng) {
  return FeatureExtractor(spec, random_dictionaries(spec, rng));
}

inline Volume random_volume(const Dims& d, std::size_t channels, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Volume v(d, channels);
  for (float& x : v.storage()) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

inline ExtractorSpec make_spec(Representation rep, std::array<int, 3> patch, std::array<int, 3> m,
                               std::vector<int> scales, std::vector<ChannelGroup> groups, double alpha = 0.25) {
  ExtractorSpec spec;
  spec.patch.size = patch;
  spec.representation = rep;
  spec.neighborhood = m;
  spec.scales = std::move(scales);
  spec.groups = std::move(groups);
  spec.encoder.alpha = alpha;
  return spec;
}

inline ExtractorSpec ss_spec(std::size_t k) {
  return make_spec(Representation::rf, {5, 5, 5}, {1, 1, 1}, {1}, {{InputGroup::image, 1, k}});
}
inline ExtractorSpec ss_fv_spec(std::size_t k) {
  return make_spec(Representation::foveated, {5, 5, 5}, {5, 5, 5}, {1}, {{InputGroup::image, 1, k}});
}
inline ExtractorSpec ms_fv_spec(std::size_t k) {
  return make_spec(Representation::foveated, {5, 5, 5}, {5, 5, 5}, {1, 2}, {{InputGroup::image, 1, k}});
}

// Random MLP whose outputs vary with every input.
inline Mlp random_mlp(std::size_t d, std::size_t hidden, Rng& rng) {
  Mlp m = Mlp::initialized({d, hidden, 3}, rng.next());
  for (auto& b : m.biases)
    for (float& v : b) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  return m;
}

// Identity normalizer of length d.
inline FeatureNormalizer identity_normalizer(std::size_t d) {
  FeatureNormalizer n;
  n.mean.assign(d, 0.0);
  n.std.assign(d, 1.0);
  return n;
}

inline IterationModel random_iteration(const ExtractorSpec& spec, int index, Rng& rng, std::size_t hidden = 6) {
  IterationModel m;
  m.index = index;
  m.extractor = random_extractor(spec, rng);
  m.normalizer = identity_normalizer(m.extractor.dims());
  m.mlp = random_mlp(m.extractor.dims(), hidden, rng);
  return m;
}

}  // namespace fixtures
