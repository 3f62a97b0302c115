#include "dawmr/extractor.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <omp.h>

#include "dawmr/transform.hpp"

namespace dawmr {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

std::int64_t half_support(const ExtractorSpec& spec, int axis) {
  return spec.patch.half(axis) + spec.neighborhood[static_cast<std::size_t>(axis)] / 2;
}

std::size_t neighborhood_size(const ExtractorSpec& spec) {
  return static_cast<std::size_t>(spec.neighborhood[0] * spec.neighborhood[1] * spec.neighborhood[2]);
}

// Offsets of the pooling / RF neighborhood in z, y, x order.
std::vector<Coord> neighborhood_offsets(const ExtractorSpec& spec) {
  std::vector<Coord> offsets;
  const int hx = spec.neighborhood[0] / 2, hy = spec.neighborhood[1] / 2, hz = spec.neighborhood[2] / 2;
  for (int z = -hz; z <= hz; ++z)
    for (int y = -hy; y <= hy; ++y)
      for (int x = -hx; x <= hx; ++x) offsets.push_back({x, y, z});
  return offsets;
}

Coord scaled(const Coord& l, int s) { return {floor_div(l.x, s), floor_div(l.y, s), floor_div(l.z, s)}; }

}  // namespace

std::string to_string(Representation r) { return r == Representation::rf ? "rf" : "foveated"; }
std::string to_string(PoolingMode p) { return p == PoolingMode::max ? "max" : "average"; }

void ExtractorSpec::validate() const {
  patch.validate();
  for (int m : neighborhood) require(m >= 1 && m % 2 == 1, "neighborhood sides must be odd and >= 1");
  require(!scales.empty(), "at least one scale is required");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    require(scales[i] >= 1, "scales must be >= 1");
    require(i == 0 || scales[i] > scales[i - 1], "scales must be strictly increasing");
  }
  require(!groups.empty(), "at least one channel group is required");
  for (const ChannelGroup& g : groups) {
    require(g.channels >= 1, "channel groups need at least one channel");
    require(g.dict_size >= 1, "dictionary size must be >= 1");
  }
  require(encoder.alpha >= 0.0, "alpha must be >= 0");
}

std::size_t representation_dims(const ExtractorSpec& spec) {
  std::size_t per_scale = 0;
  for (const ChannelGroup& g : spec.groups) {
    const std::size_t enc = spec.encoder.output_dim(g.dict_size);
    per_scale += spec.representation == Representation::rf ? enc * neighborhood_size(spec) : enc * 2;
  }
  return per_scale * spec.scales.size();
}

std::array<std::int64_t, 3> field_of_view(const ExtractorSpec& spec) {
  std::array<std::int64_t, 3> fov{0, 0, 0};
  for (int s : spec.scales)
    for (int a = 0; a < 3; ++a)
      fov[static_cast<std::size_t>(a)] = std::max<std::int64_t>(
          fov[static_cast<std::size_t>(a)],
          static_cast<std::int64_t>(spec.patch.size[static_cast<std::size_t>(a)] +
                                    spec.neighborhood[static_cast<std::size_t>(a)] - 1) * s);
  return fov;
}

Box fov_box(const ExtractorSpec& spec, const Coord& l) {
  Box out;
  bool first = true;
  for (int s : spec.scales) {
    const Coord ls = scaled(l, s);
    for (int a = 0; a < 3; ++a) {
      const std::int64_t h = half_support(spec, a);
      const std::int64_t lo = s * (ls[a] - h), hi = s * (ls[a] + h + 1);
      out.lo[a] = first ? lo : std::min(out.lo[a], lo);
      out.hi[a] = first ? hi : std::max(out.hi[a], hi);
    }
    first = false;
  }
  return out;
}

Box support_region(const ExtractorSpec& spec, const Dims& dims, const Box& input_valid) {
  Box out;
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<std::int64_t>(dims[a]);
    std::int64_t first = -1, last = -2;
    for (std::int64_t l = 0; l < n; ++l) {
      bool ok = true;
      for (int s : spec.scales) {
        const std::int64_t ls = l / s, h = half_support(spec, a), scaled_n = n / s;
        const std::int64_t lo = s * (ls - h), hi = s * (ls + h + 1);
        ok = ok && ls - h >= 0 && ls + h < scaled_n && lo >= input_valid.lo[a] && hi <= input_valid.hi[a];
      }
      if (!ok) continue;
      if (first < 0) first = l;
      last = l;
    }
    out.lo[a] = first < 0 ? 0 : first;
    out.hi[a] = first < 0 ? 0 : last + 1;
  }
  return out;
}

Box support_region(const ExtractorSpec& spec, const Dims& dims) { return support_region(spec, dims, Box::of(dims)); }

ScaledInputs::ScaledInputs(const ExtractorSpec& spec, const ExtractorInputs& inputs) : groups_(spec.groups.size()) {
  require(inputs.image != nullptr, "feature extraction needs an image input");
  dims_ = inputs.image->dims();
  for (int s : spec.scales)
    for (const ChannelGroup& g : spec.groups) {
      const Volume* source = g.input == InputGroup::image ? inputs.image : inputs.affinity;
      if (source == nullptr) throw ValidationError("feature extraction needs an affinity input for this spec");
      require(source->dims() == dims_, "input volumes must share dims");
      require(source->channels() == g.channels, "input channel count does not match its channel group");
      volumes_.push_back(downsample_average(*source, s));
    }
}

FeatureExtractor::FeatureExtractor(ExtractorSpec spec, std::vector<Dictionary> dictionaries)
    : spec_(std::move(spec)), dictionaries_(std::move(dictionaries)) {
  spec_.validate();
  require(dictionaries_.size() == spec_.scales.size() * spec_.groups.size(),
          "expected one dictionary per (scale, channel group)");
  for (std::size_t si = 0; si < spec_.scales.size(); ++si)
    for (std::size_t g = 0; g < spec_.groups.size(); ++g) {
      const Dictionary& d = dictionary(si, g);
      require(d.k() == spec_.groups[g].dict_size, "dictionary size does not match its channel group");
      require(d.channels() == spec_.groups[g].channels, "dictionary channels do not match its channel group");
      require(d.patch() == spec_.patch, "dictionary patch does not match the extractor patch");
      require(spec_.encoder.kind != EncoderKind::triangle_kmeans || d.has_centroids(),
              "triangle encoding needs k-means dictionaries");
    }
  dims_ = representation_dims(spec_);
}

void FeatureExtractor::check_location(const ScaledInputs& inputs, const Coord& l) const {
  if (!support_region(spec_, inputs.dims()).contains(l))
    throw ValidationError("location (" + std::to_string(l.x) + "," + std::to_string(l.y) + "," + std::to_string(l.z) +
                          ") has insufficient border margin");
}

void FeatureExtractor::extract_reference(const ScaledInputs& inputs, const Coord& l, std::span<float> out) const {
  check_location(inputs, l);
  require(out.size() == dims_, "feature buffer has the wrong length");
  const auto offsets = neighborhood_offsets(spec_);
  EncodeScratch scratch;
  std::size_t pos = 0;
  for (std::size_t si = 0; si < spec_.scales.size(); ++si) {
    const Coord ls = scaled(l, spec_.scales[si]);
    for (std::size_t g = 0; g < spec_.groups.size(); ++g) {
      const Dictionary& dict = dictionary(si, g);
      const Volume& vol = inputs.at(si, g);
      const std::size_t len = spec_.encoder.output_dim(dict.k());
      std::vector<float> encodings(offsets.size() * len);
      std::vector<float> centre(len);
      for (std::size_t o = 0; o < offsets.size(); ++o) {
        const auto patch = extract_patch(vol, ls + offsets[o], spec_.patch);
        encode_into(dict, spec_.encoder, patch, {encodings.data() + o * len, len}, scratch);
      }
      if (spec_.representation == Representation::rf) {
        std::copy(encodings.begin(), encodings.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
        pos += encodings.size();
      } else {
        const auto patch = extract_patch(vol, ls, spec_.patch);
        encode_into(dict, spec_.encoder, patch, out.subspan(pos, len), scratch);
        pos += len;
        pool(encodings, spec_.pooling, out.subspan(pos, len));
        pos += len;
      }
    }
  }
}

std::vector<float> FeatureExtractor::extract_reference(const ScaledInputs& inputs, const Coord& l) const {
  std::vector<float> out(dims_);
  extract_reference(inputs, l, out);
  return out;
}

std::vector<float> FeatureExtractor::extract_batch(const ScaledInputs& inputs, std::span<const Coord> locations,
                                                   int workers) const {
  constexpr std::int64_t kBlock = 16;
  const Box support = support_region(spec_, inputs.dims());
  for (const Coord& l : locations)
    if (!support.contains(l)) check_location(inputs, l);

  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const Coord& l = locations[i];
    bins[{l.z / kBlock, l.y / kBlock, l.x / kBlock}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> blocks;
  for (const auto& [key, members] : bins) blocks.push_back(&members);

  const auto offsets = neighborhood_offsets(spec_);
  std::vector<float> out(locations.size() * dims_);
  const std::size_t groups = spec_.groups.size();

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& members = *blocks[b];
    std::vector<EncodingMap> maps;
    for (std::size_t si = 0; si < spec_.scales.size(); ++si) {
      const int s = spec_.scales[si];
      Box region{scaled(locations[members[0]], s), scaled(locations[members[0]], s)};
      for (std::size_t i : members) {
        const Coord ls = scaled(locations[i], s);
        for (int a = 0; a < 3; ++a) {
          region.lo[a] = std::min(region.lo[a], ls[a]);
          region.hi[a] = std::max(region.hi[a], ls[a]);
        }
      }
      for (int a = 0; a < 3; ++a) {
        region.lo[a] -= spec_.neighborhood[static_cast<std::size_t>(a)] / 2;
        region.hi[a] += spec_.neighborhood[static_cast<std::size_t>(a)] / 2 + 1;
      }
      for (std::size_t g = 0; g < groups; ++g)
        maps.push_back(encode_region_serial(dictionary(si, g), spec_.encoder, inputs.at(si, g), region));
    }

    std::vector<const float*> rows(offsets.size());
    for (std::size_t i : members) {
      float* dst = out.data() + i * dims_;
      for (std::size_t si = 0; si < spec_.scales.size(); ++si) {
        const Coord ls = scaled(locations[i], spec_.scales[si]);
        for (std::size_t g = 0; g < groups; ++g) {
          const EncodingMap& map = maps[si * groups + g];
          const std::size_t len = map.length;
          for (std::size_t o = 0; o < offsets.size(); ++o) rows[o] = map.at(ls + offsets[o]);
          if (spec_.representation == Representation::rf) {
            for (const float* r : rows) dst = std::copy(r, r + len, dst);
          } else {
            const float* c = map.at(ls);
            dst = std::copy(c, c + len, dst);
            pool_rows(rows, spec_.pooling, {dst, len});
            dst += len;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace dawmr
