#include "dawmr/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dawmr/binio.hpp"
#include "dawmr/rng.hpp"

namespace dawmr {

Dictionary::Dictionary(PatchSpec patch, std::size_t channels, DictionaryMethod method, std::vector<float> atoms,
                       std::vector<float> centroids, WhiteningTransform whitening)
    : patch_(patch),
      channels_(channels),
      dim_(patch.voxels() * channels),
      method_(method),
      atoms_(std::move(atoms)),
      centroids_(std::move(centroids)),
      whitening_(std::move(whitening)) {
  patch_.validate();
  require(channels_ >= 1, "dictionary needs at least one channel");
  require(!atoms_.empty() && atoms_.size() % dim_ == 0, "dictionary atoms do not match the patch dimension");
  k_ = atoms_.size() / dim_;
  require(centroids_.empty() || centroids_.size() == atoms_.size(), "centroid block size mismatch");
  require(!whitening_.enabled || whitening_.dim == dim_, "whitening dimension mismatch");
  atoms_t_.resize(atoms_.size());
  for (std::size_t j = 0; j < k_; ++j)
    for (std::size_t i = 0; i < dim_; ++i) atoms_t_[i * k_ + j] = atoms_[j * dim_ + i];
}

namespace {

// k distinct starting rows in random order; exact duplicates are skipped
// while enough distinct rows remain.
std::vector<std::size_t> pick_initial_rows(const PatchSet& patches, std::size_t k, Rng& rng) {
  const std::size_t n = patches.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> duplicates;
  for (std::size_t idx : order) {
    if (chosen.size() == k) break;
    auto row = patches.row(idx);
    const bool dup = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
      auto other = patches.row(c);
      return std::equal(row.begin(), row.end(), other.begin());
    });
    (dup ? duplicates : chosen).push_back(idx);
  }
  for (std::size_t i = 0; chosen.size() < k; ++i) chosen.push_back(duplicates[i]);
  return chosen;
}

double normalize(std::span<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return norm;
}

void load_unit_row(const PatchSet& patches, std::size_t idx, std::span<double> atom, Rng& rng) {
  auto row = patches.row(idx);
  std::copy(row.begin(), row.end(), atom.begin());
  if (normalize(atom) == 0.0) {
    for (double& x : atom) x = rng.gaussian();
    normalize(atom);
  }
}

std::vector<float> to_float(const std::vector<double>& v) { return {v.begin(), v.end()}; }

void check_learning_inputs(const PatchSet& patches, std::size_t channels, const PatchSpec& patch,
                           const DictionaryLearningOptions& options) {
  patch.validate();
  require(options.k >= 1, "dictionary size k must be >= 1");
  require(options.epochs >= 0, "epochs must be >= 0");
  require(patches.dim == patch.voxels() * channels, "patch set dimension does not match patch spec");
  require(patches.size() >= options.k,
          "k = " + std::to_string(options.k) + " exceeds the number of patches (" + std::to_string(patches.size()) + ")");
}

}  // namespace

LearnedDictionary learn_dictionary_omp1(const PatchSet& patches, const PatchSpec& patch, std::size_t channels,
                                        const DictionaryLearningOptions& options, WhiteningTransform whitening) {
  check_learning_inputs(patches, channels, patch, options);
  const std::size_t n = patches.size(), dim = patches.dim, k = options.k;
  Rng rng(options.seed);

  std::vector<double> atoms(k * dim);
  const auto initial = pick_initial_rows(patches, k, rng);
  for (std::size_t j = 0; j < k; ++j) load_unit_row(patches, initial[j], {atoms.data() + j * dim, dim}, rng);

  std::vector<std::size_t> assignment(n);
  std::vector<double> code(n);
  std::vector<double> atoms_t(k * dim);
  std::vector<double> proj(k);

  auto assign = [&]() {
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < dim; ++i) atoms_t[i * k + j] = atoms[j * dim + i];
    double error = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      auto x = patches.row(p);
      std::fill(proj.begin(), proj.end(), 0.0);
      double norm2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double xi = x[i];
        norm2 += xi * xi;
        const double* col = atoms_t.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) proj[j] += xi * col[j];
      }
      std::size_t best = 0;
      for (std::size_t j = 1; j < k; ++j)
        if (std::abs(proj[j]) > std::abs(proj[best])) best = j;
      assignment[p] = best;
      code[p] = proj[best];
      error += norm2 - proj[best] * proj[best];
    }
    return error;
  };

  LearnedDictionary result;
  result.objective.push_back(assign());
  std::vector<double> acc(k * dim);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      auto x = patches.row(p);
      double* a = acc.data() + assignment[p] * dim;
      for (std::size_t i = 0; i < dim; ++i) a[i] += code[p] * x[i];
    }
    for (std::size_t j = 0; j < k; ++j) {
      std::span<double> a(acc.data() + j * dim, dim);
      std::span<double> atom(atoms.data() + j * dim, dim);
      if (normalize(a) > 0.0) {
        std::copy(a.begin(), a.end(), atom.begin());
      } else {
        load_unit_row(patches, rng.below(n), atom, rng);
      }
    }
    result.objective.push_back(assign());
  }
  result.dictionary = Dictionary(patch, channels, DictionaryMethod::omp1, to_float(atoms), {}, std::move(whitening));
  return result;
}

LearnedDictionary learn_dictionary_kmeans(const PatchSet& patches, const PatchSpec& patch, std::size_t channels,
                                          const DictionaryLearningOptions& options, WhiteningTransform whitening) {
  check_learning_inputs(patches, channels, patch, options);
  const std::size_t n = patches.size(), dim = patches.dim, k = options.k;
  Rng rng(options.seed);

  std::vector<double> centroids(k * dim);
  const auto initial = pick_initial_rows(patches, k, rng);
  for (std::size_t j = 0; j < k; ++j) {
    auto row = patches.row(initial[j]);
    std::copy(row.begin(), row.end(), centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
  }

  std::vector<std::size_t> assignment(n);
  auto assign = [&]() {
    double sse = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      auto x = patches.row(p);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double* c = centroids.data() + j * dim;
        double d = 0.0;
        for (std::size_t i = 0; i < dim; ++i) d += (x[i] - c[i]) * (x[i] - c[i]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assignment[p] = best;
      sse += best_d;
    }
    return sse;
  };

  LearnedDictionary result;
  result.objective.push_back(assign());
  std::vector<double> sum(k * dim);
  std::vector<std::size_t> count(k);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      auto x = patches.row(p);
      double* s = sum.data() + assignment[p] * dim;
      for (std::size_t i = 0; i < dim; ++i) s[i] += x[i];
      ++count[assignment[p]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      double* c = centroids.data() + j * dim;
      if (count[j] == 0) {
        auto row = patches.row(rng.below(n));
        std::copy(row.begin(), row.end(), c);
      } else {
        for (std::size_t i = 0; i < dim; ++i) c[i] = sum[j * dim + i] / static_cast<double>(count[j]);
      }
    }
    result.objective.push_back(assign());
  }

  // A zero centroid has no direction and stays a zero atom.
  std::vector<double> atoms = centroids;
  for (std::size_t j = 0; j < k; ++j) normalize({atoms.data() + j * dim, dim});
  result.dictionary = Dictionary(patch, channels, DictionaryMethod::kmeans, to_float(atoms), to_float(centroids),
                                 std::move(whitening));
  return result;
}

void encode_into(const Dictionary& dict, const EncoderConfig& encoder, std::span<const float> patch,
                 std::span<float> out, EncodeScratch& scratch) {
  const std::size_t dim = dict.dim(), k = dict.k();
  if (patch.size() != dim)
    throw ValidationError("patch length " + std::to_string(patch.size()) + " does not match dictionary dim " +
                          std::to_string(dim));
  if (out.size() != encoder.output_dim(k)) throw ValidationError("encoding buffer has the wrong length");

  std::span<const float> x = patch;
  if (dict.whitening().enabled) {
    scratch.patch.assign(patch.begin(), patch.end());
    scratch.whitening.resize(dim);
    dict.whitening().apply(scratch.patch, scratch.whitening);
    x = scratch.patch;
  }

  if (encoder.kind == EncoderKind::soft_threshold_polarity) {
    scratch.projection.assign(k, 0.0f);
    float* z = scratch.projection.data();
    const float* at = dict.atoms_transposed().data();
    for (std::size_t i = 0; i < dim; ++i) {
      const float xi = x[i];
      const float* col = at + i * k;
      for (std::size_t j = 0; j < k; ++j) z[j] += xi * col[j];
    }
    const auto alpha = static_cast<float>(encoder.alpha);
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::max(0.0f, z[j] - alpha);
      out[k + j] = std::max(0.0f, -z[j] - alpha);
    }
    return;
  }

  if (!dict.has_centroids()) throw ValidationError("triangle encoding needs a k-means dictionary");
  double mean = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    auto c = dict.centroid(j);
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) d += (static_cast<double>(x[i]) - c[i]) * (static_cast<double>(x[i]) - c[i]);
    out[j] = static_cast<float>(std::sqrt(d));
    mean += out[j];
  }
  mean /= static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = static_cast<float>(std::max(0.0, mean - out[j]));
}

std::vector<float> encode(const Dictionary& dict, const EncoderConfig& encoder, std::span<const float> patch) {
  std::vector<float> out(encoder.output_dim(dict.k()));
  EncodeScratch scratch;
  encode_into(dict, encoder, patch, out, scratch);
  return out;
}

namespace {
constexpr std::uint32_t kDictVersion = 1;
}

void write_dictionary(const Dictionary& dict, double alpha, const std::string& path) {
  binio::Writer w(path);
  w.magic("DWDC");
  w.put<std::uint32_t>(kDictVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dict.k()));
  for (int s : dict.patch().size) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dict.channels()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(dict.method()));
  w.put<double>(alpha);
  const WhiteningTransform& wt = dict.whitening();
  w.put<std::uint8_t>(wt.enabled ? 1 : 0);
  if (wt.enabled) {
    w.put<std::uint8_t>(wt.contrast_normalize ? 1 : 0);
    w.put<double>(wt.eps_zca);
    w.put<double>(wt.eps_cn);
    w.put_array<double>(wt.mean);
    w.put_array<double>(wt.matrix);
  }
  w.put_array<float>(dict.atoms());
  if (dict.method() == DictionaryMethod::kmeans) w.put_array<float>(dict.centroids());
  w.close();
}

Dictionary read_dictionary(const std::string& path, double* alpha) {
  binio::Reader r(path);
  r.expect_magic("DWDC");
  if (r.get<std::uint32_t>() != kDictVersion) throw FormatError(path + ": unsupported dictionary version");
  const auto k = r.get<std::uint32_t>();
  PatchSpec patch;
  for (int& s : patch.size) s = static_cast<int>(r.get<std::uint32_t>());
  const auto channels = r.get<std::uint32_t>();
  const auto method_byte = r.get<std::uint8_t>();
  if (method_byte != 1 && method_byte != 2) throw FormatError(path + ": unknown dictionary method");
  const auto method = static_cast<DictionaryMethod>(method_byte);
  const double a = r.get<double>();
  if (alpha) *alpha = a;
  for (int s : patch.size)
    if (s < 1 || s % 2 == 0 || s > 1024) throw FormatError(path + ": invalid patch size");
  if (k == 0 || channels == 0 || channels > 64) throw FormatError(path + ": invalid dictionary header");
  const std::size_t dim = patch.voxels() * channels;
  WhiteningTransform wt;
  if (r.get<std::uint8_t>() != 0) {
    wt.enabled = true;
    wt.contrast_normalize = r.get<std::uint8_t>() != 0;
    wt.eps_zca = r.get<double>();
    wt.eps_cn = r.get<double>();
    wt.dim = dim;
    wt.mean = r.get_array<double>(dim);
    wt.matrix = r.get_array<double>(static_cast<std::uint64_t>(dim) * dim);
  }
  auto atoms = r.get_array<float>(static_cast<std::uint64_t>(k) * dim);
  std::vector<float> centroids;
  if (method == DictionaryMethod::kmeans) centroids = r.get_array<float>(static_cast<std::uint64_t>(k) * dim);
  if (r.remaining() != 0) throw FormatError(path + ": trailing bytes after dictionary payload");
  return Dictionary(patch, channels, method, std::move(atoms), std::move(centroids), std::move(wt));
}

}  // namespace dawmr
