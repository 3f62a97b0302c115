#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "dawmr/dictionary.hpp"
#include "dawmr/encoding_kernels.hpp"
#include "dawmr/patch.hpp"

namespace dawmr {

enum class Representation : std::uint8_t { rf = 0, foveated = 1 };

struct ChannelGroup {
  InputGroup input = InputGroup::image;
  std::size_t channels = 1;
  std::size_t dict_size = 0;
  bool operator==(const ChannelGroup&) const = default;
};

// Shape of one feature-extraction stage. Features are concatenated
// scale-major, then by channel group; within a group an RF representation
// lists the raw encodings at every neighborhood offset (z, y, x order) and a
// foveated one is [centre encoding, pooled encoding].
struct ExtractorSpec {
  PatchSpec patch;
  Representation representation = Representation::foveated;
  std::array<int, 3> neighborhood{5, 5, 5};
  PoolingMode pooling = PoolingMode::max;
  std::vector<int> scales{1};
  EncoderConfig encoder;
  std::vector<ChannelGroup> groups;

  void validate() const;
  bool operator==(const ExtractorSpec&) const = default;
};

// Feature vector length d.
std::size_t representation_dims(const ExtractorSpec& spec);

// Per-axis extent of input voxels that can influence one location:
// max over scales of (patch + neighborhood - 1) * scale.
std::array<std::int64_t, 3> field_of_view(const ExtractorSpec& spec);

// The exact input box read for location `l` (union over scales). Its extent
// equals field_of_view(spec) on every axis.
Box fov_box(const ExtractorSpec& spec, const Coord& l);

// Locations of a `dims` volume whose feature support fits inside the volume
// and whose fov box lies inside `input_valid`.
Box support_region(const ExtractorSpec& spec, const Dims& dims, const Box& input_valid);
Box support_region(const ExtractorSpec& spec, const Dims& dims);

struct ExtractorInputs {
  const Volume* image = nullptr;
  const Volume* affinity = nullptr;
};

// Inputs downsampled once per (scale, group).
class ScaledInputs {
 public:
  ScaledInputs(const ExtractorSpec& spec, const ExtractorInputs& inputs);

  const Volume& at(std::size_t scale_index, std::size_t group) const { return volumes_[scale_index * groups_ + group]; }
  const Dims& dims() const { return dims_; }

 private:
  std::size_t groups_ = 0;
  Dims dims_;
  std::vector<Volume> volumes_;
};

class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  // `dictionaries` in scale-major order: index = scale_index * groups + group.
  FeatureExtractor(ExtractorSpec spec, std::vector<Dictionary> dictionaries);

  const ExtractorSpec& spec() const { return spec_; }
  std::size_t dims() const { return dims_; }
  const Dictionary& dictionary(std::size_t scale_index, std::size_t group) const {
    return dictionaries_[scale_index * spec_.groups.size() + group];
  }
  const std::vector<Dictionary>& dictionaries() const { return dictionaries_; }

  // Straightforward per-location path: encodes every needed offset directly.
  void extract_reference(const ScaledInputs& inputs, const Coord& l, std::span<float> out) const;
  std::vector<float> extract_reference(const ScaledInputs& inputs, const Coord& l) const;

  // Features for many locations (row i belongs to locations[i]). Locations
  // are binned into spatial blocks whose encoding maps are computed once;
  // blocks run in parallel and each row is independent of the worker count.
  std::vector<float> extract_batch(const ScaledInputs& inputs, std::span<const Coord> locations,
                                   int workers = 1) const;

 private:
  void check_location(const ScaledInputs& inputs, const Coord& l) const;

  ExtractorSpec spec_;
  std::vector<Dictionary> dictionaries_;
  std::size_t dims_ = 0;
};

std::string to_string(Representation r);
std::string to_string(PoolingMode p);

}  // namespace dawmr
