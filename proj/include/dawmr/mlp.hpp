#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dawmr/common.hpp"
#include "dawmr/rng.hpp"

namespace dawmr {

// Fully connected ReLU network with sigmoid outputs. Layer l maps
// sizes[l] -> sizes[l+1]; its weights are stored input-major
// (weights[l][i * out + o]) so both passes run as contiguous axpy sweeps.
template <typename T>
struct BasicMlp {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<T>> weights;
  std::vector<std::vector<T>> biases;
  // Training metadata carried with the model.
  double dropout_hidden = 0.0;
  double dropout_input = 0.0;
  double inverse_margin = 0.0;

  std::size_t layers() const { return weights.size(); }
  std::size_t input_dim() const { return sizes.front(); }
  std::size_t output_dim() const { return sizes.back(); }

  static BasicMlp zeros(std::vector<std::size_t> layer_sizes) {
    require(layer_sizes.size() >= 2, "an MLP needs at least an input and an output layer");
    for (std::size_t s : layer_sizes) require(s >= 1, "layer sizes must be >= 1");
    BasicMlp m;
    m.sizes = std::move(layer_sizes);
    for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
      m.weights.emplace_back(m.sizes[l] * m.sizes[l + 1], T(0));
      m.biases.emplace_back(m.sizes[l + 1], T(0));
    }
    return m;
  }

  // Weights uniform in +-1/sqrt(fan_in), zero biases.
  static BasicMlp initialized(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
    BasicMlp m = zeros(std::move(layer_sizes));
    Rng rng(seed);
    for (std::size_t l = 0; l < m.layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(m.sizes[l]));
      for (T& w : m.weights[l]) w = static_cast<T>(rng.uniform(-bound, bound));
    }
    return m;
  }

  template <typename U>
  BasicMlp<U> cast() const {
    BasicMlp<U> m;
    m.sizes = sizes;
    for (const auto& w : weights) m.weights.emplace_back(w.begin(), w.end());
    for (const auto& b : biases) m.biases.emplace_back(b.begin(), b.end());
    m.dropout_hidden = dropout_hidden;
    m.dropout_input = dropout_input;
    m.inverse_margin = inverse_margin;
    return m;
  }

  void set_zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), T(0));
    for (auto& b : biases) std::fill(b.begin(), b.end(), T(0));
  }

  bool all_finite() const {
    for (const auto* group : {&weights, &biases})
      for (const auto& v : *group)
        for (T x : v)
          if (!std::isfinite(x)) return false;
    return true;
  }

  bool operator==(const BasicMlp&) const = default;
};

using Mlp = BasicMlp<float>;

// Multiplicative dropout factors, one vector per layer input: index 0 is the
// network input, index l the output of hidden layer l. Entries are 0 for a
// dropped unit and 1/(1-rate) for a kept one. An empty vector means no
// dropout on that layer.
template <typename T>
using DropoutMasks = std::vector<std::vector<T>>;

template <typename T>
DropoutMasks<T> sample_dropout(const BasicMlp<T>& mlp, double input_rate, double hidden_rate, Rng& rng) {
  DropoutMasks<T> masks(mlp.layers());
  for (std::size_t l = 0; l < mlp.layers(); ++l) {
    const double rate = l == 0 ? input_rate : hidden_rate;
    if (rate <= 0.0) continue;
    const T keep = static_cast<T>(1.0 / (1.0 - rate));
    masks[l].resize(mlp.sizes[l]);
    for (T& f : masks[l]) f = rng.uniform() < rate ? T(0) : keep;
  }
  return masks;
}

// activations[0] is the (masked) input, activations[l] the (masked) output
// of layer l, and activations.back() the sigmoid outputs.
template <typename T>
struct ForwardPass {
  std::vector<std::vector<T>> activations;
};

template <typename T>
T logistic(T z) {
  const T o = T(1) / (T(1) + std::exp(-z));
  constexpr T eps = std::numeric_limits<T>::epsilon();
  return std::clamp(o, eps, T(1) - eps);
}

template <typename T>
void forward(const BasicMlp<T>& mlp, std::span<const std::type_identity_t<T>> x,
             const std::type_identity_t<DropoutMasks<T>>* masks, ForwardPass<T>& pass) {
  require(x.size() == mlp.input_dim(), "input length does not match the MLP");
  for (T v : x)
    if (!std::isfinite(v)) throw ValidationError("non-finite MLP input");
  const std::size_t L = mlp.layers();
  require(masks == nullptr || masks->size() == L, "dropout masks do not match the MLP layers");
  pass.activations.resize(L + 1);
  auto apply_mask = [&](std::size_t l) {
    if (masks == nullptr || (*masks)[l].empty()) return;
    const auto& m = (*masks)[l];
    require(m.size() == mlp.sizes[l], "dropout mask length does not match its layer");
    for (std::size_t i = 0; i < m.size(); ++i) pass.activations[l][i] *= m[i];
  };
  pass.activations[0].assign(x.begin(), x.end());
  apply_mask(0);
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t in = mlp.sizes[l], out = mlp.sizes[l + 1];
    const auto& a = pass.activations[l];
    auto& z = pass.activations[l + 1];
    z.assign(mlp.biases[l].begin(), mlp.biases[l].end());
    const T* w = mlp.weights[l].data();
    for (std::size_t i = 0; i < in; ++i) {
      const T ai = a[i];
      if (ai == T(0)) continue;
      const T* row = w + i * out;
      for (std::size_t o = 0; o < out; ++o) z[o] += ai * row[o];
    }
    if (l + 1 < L) {
      for (T& v : z) v = std::max(v, T(0));
      apply_mask(l + 1);
    } else {
      for (T& v : z) v = logistic(v);
    }
  }
}

// Row-major minibatch: n inputs of length d, n x outputs targets (already
// mapped to margin / 1 - margin) and a validity flag per target.
template <typename T>
struct Batch {
  std::size_t n = 0;
  std::span<const T> inputs;
  std::span<const T> targets;
  std::span<const std::uint8_t> valid;
  // Empty, or one mask set per example.
  std::span<const DropoutMasks<T>> masks;
};

template <typename T>
T cross_entropy(T o, T t) {
  constexpr T floor = T(1e-12);
  return -(t * std::log(std::max(o, floor)) + (T(1) - t) * std::log(std::max(T(1) - o, floor)));
}

// Mean cross-entropy over the valid outputs of the batch; `grad` (same shape
// as `mlp`) receives its gradient. A batch without valid outputs has zero
// loss and zero gradient.
template <typename T>
T loss_and_gradient(const BasicMlp<T>& mlp, const Batch<T>& batch, BasicMlp<T>& grad) {
  const std::size_t d = mlp.input_dim(), k = mlp.output_dim(), L = mlp.layers();
  require(batch.inputs.size() == batch.n * d, "batch inputs have the wrong length");
  require(batch.targets.size() == batch.n * k && batch.valid.size() == batch.n * k,
          "batch targets have the wrong length");
  require(batch.masks.empty() || batch.masks.size() == batch.n, "batch masks have the wrong length");
  if (grad.sizes != mlp.sizes) grad = BasicMlp<T>::zeros(mlp.sizes);
  grad.set_zero();

  std::size_t count = 0;
  for (std::uint8_t v : batch.valid) count += v != 0;
  if (count == 0) return T(0);
  const T scale = T(1) / static_cast<T>(count);

  ForwardPass<T> pass;
  std::vector<T> delta, prev;
  T loss = 0;
  for (std::size_t e = 0; e < batch.n; ++e) {
    const DropoutMasks<T>* masks = batch.masks.empty() ? nullptr : &batch.masks[e];
    forward(mlp, batch.inputs.subspan(e * d, d), masks, pass);
    const auto& o = pass.activations[L];
    delta.assign(k, T(0));
    for (std::size_t j = 0; j < k; ++j) {
      if (!batch.valid[e * k + j]) continue;
      const T t = batch.targets[e * k + j];
      loss += cross_entropy(o[j], t);
      delta[j] = (o[j] - t) * scale;
    }
    for (std::size_t l = L; l-- > 0;) {
      const std::size_t in = mlp.sizes[l], out = mlp.sizes[l + 1];
      const auto& a = pass.activations[l];
      T* gw = grad.weights[l].data();
      for (std::size_t i = 0; i < in; ++i) {
        const T ai = a[i];
        if (ai == T(0)) continue;
        T* row = gw + i * out;
        for (std::size_t o2 = 0; o2 < out; ++o2) row[o2] += ai * delta[o2];
      }
      for (std::size_t o2 = 0; o2 < out; ++o2) grad.biases[l][o2] += delta[o2];
      if (l == 0) break;
      // Back through the previous hidden layer: its stored activation is
      // relu(z) times the dropout factor, so a positive value marks a live unit.
      prev.assign(in, T(0));
      const T* w = mlp.weights[l].data();
      const std::vector<T>* m = masks != nullptr && !(*masks)[l].empty() ? &(*masks)[l] : nullptr;
      for (std::size_t i = 0; i < in; ++i) {
        if (!(a[i] > T(0))) continue;
        const T* row = w + i * out;
        T s = 0;
        for (std::size_t o2 = 0; o2 < out; ++o2) s += row[o2] * delta[o2];
        prev[i] = m != nullptr ? s * (*m)[i] : s;
      }
      delta.swap(prev);
    }
  }
  return loss * scale;
}

// Inference-mode outputs for a row-major n x d block; rows are independent.
std::vector<float> predict(const Mlp& mlp, std::span<const float> features, int workers = 1);

// "DWMP", u32 version, u32 layer count, (layers + 1) u32 sizes,
// f64 dropout_hidden, f64 dropout_input, f64 inverse_margin, then per layer
// f32 weights (input-major) followed by f32 biases.
void write_mlp(const Mlp& mlp, const std::string& path);
Mlp read_mlp(const std::string& path);

}  // namespace dawmr
