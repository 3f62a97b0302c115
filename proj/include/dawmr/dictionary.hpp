#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dawmr/patch.hpp"
#include "dawmr/whitening.hpp"

namespace dawmr {

enum class DictionaryMethod : std::uint8_t { omp1 = 1, kmeans = 2 };
enum class EncoderKind : std::uint8_t { soft_threshold_polarity = 1, triangle_kmeans = 2 };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::soft_threshold_polarity;
  double alpha = 0.25;

  // 2k for the two-polarity soft threshold, k for triangle k-means.
  std::size_t output_dim(std::size_t k) const { return kind == EncoderKind::soft_threshold_polarity ? 2 * k : k; }
  bool operator==(const EncoderConfig&) const = default;
};

// k unit-norm atoms over flattened (patch x channels) vectors. K-means
// dictionaries also keep their raw centroids for triangle encoding.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(PatchSpec patch, std::size_t channels, DictionaryMethod method, std::vector<float> atoms,
             std::vector<float> centroids = {}, WhiteningTransform whitening = {});

  std::size_t k() const { return k_; }
  std::size_t dim() const { return dim_; }
  std::size_t channels() const { return channels_; }
  const PatchSpec& patch() const { return patch_; }
  DictionaryMethod method() const { return method_; }
  const WhiteningTransform& whitening() const { return whitening_; }

  std::span<const float> atom(std::size_t j) const { return {atoms_.data() + j * dim_, dim_}; }
  std::span<const float> centroid(std::size_t j) const { return {centroids_.data() + j * dim_, dim_}; }
  const std::vector<float>& atoms() const { return atoms_; }
  const std::vector<float>& centroids() const { return centroids_; }
  bool has_centroids() const { return !centroids_.empty(); }

  // Atoms transposed to dim x k so projections run as contiguous axpy sweeps.
  const std::vector<float>& atoms_transposed() const { return atoms_t_; }

  bool operator==(const Dictionary& o) const {
    return patch_ == o.patch_ && channels_ == o.channels_ && method_ == o.method_ && atoms_ == o.atoms_ &&
           centroids_ == o.centroids_;
  }

 private:
  PatchSpec patch_;
  std::size_t channels_ = 0;
  std::size_t dim_ = 0;
  std::size_t k_ = 0;
  DictionaryMethod method_ = DictionaryMethod::omp1;
  std::vector<float> atoms_;
  std::vector<float> centroids_;
  std::vector<float> atoms_t_;
  WhiteningTransform whitening_;
};

struct DictionaryLearningOptions {
  std::size_t k = 64;
  int epochs = 10;
  std::uint64_t seed = 0;
};

struct LearnedDictionary {
  Dictionary dictionary;
  // Objective after the initial assignment and after each epoch: 1-sparse
  // reconstruction error for OMP-1, within-cluster SSE for k-means.
  std::vector<double> objective;
};

// `patches` are expected to be whitened already when `whitening` is enabled;
// the transform is only recorded in the dictionary for encoding time.
LearnedDictionary learn_dictionary_omp1(const PatchSet& patches, const PatchSpec& patch, std::size_t channels,
                                        const DictionaryLearningOptions& options, WhiteningTransform whitening = {});
LearnedDictionary learn_dictionary_kmeans(const PatchSet& patches, const PatchSpec& patch, std::size_t channels,
                                          const DictionaryLearningOptions& options,
                                          WhiteningTransform whitening = {});

// Scratch buffers for encode_into; one per thread.
struct EncodeScratch {
  std::vector<float> patch;
  std::vector<double> whitening;
  std::vector<float> projection;
};

// Encodes a raw (unwhitened) patch. Soft threshold: z = D^T x,
// f = [max(0, z - alpha); max(0, -z - alpha)]. Triangle: z_j = |x - c_j|,
// f_j = max(0, mean(z) - z_j).
void encode_into(const Dictionary& dict, const EncoderConfig& encoder, std::span<const float> patch,
                 std::span<float> out, EncodeScratch& scratch);
std::vector<float> encode(const Dictionary& dict, const EncoderConfig& encoder, std::span<const float> patch);

// Dictionary file: "DWDC", u32 version, u32 k, 3 x u32 patch dims,
// u32 channels, u8 method, f64 alpha, u8 whitening flag, [whitening payload:
// u8 contrast flag, f64 eps_zca, f64 eps_cn, dim f64 means, dim*dim f64
// matrix], k*dim f32 atoms, [k-means only: k*dim f32 centroids].
void write_dictionary(const Dictionary& dict, double alpha, const std::string& path);
Dictionary read_dictionary(const std::string& path, double* alpha = nullptr);

}  // namespace dawmr
