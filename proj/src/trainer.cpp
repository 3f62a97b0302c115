#include "dawmr/trainer.hpp"

#include "dawmr/sampler.hpp"

namespace dawmr {

void TrainConfig::validate() const {
  require(!hidden.empty(), "at least one hidden layer is required");
  for (std::size_t h : hidden) require(h >= 1, "hidden layer sizes must be >= 1");
  require(learning_rate >= 0.0, "learning rate must be >= 0");
  require(batch_size >= 1, "batch size must be >= 1");
  require(dropout_hidden >= 0.0 && dropout_hidden < 1.0, "dropout_hidden must be in [0, 1)");
  require(dropout_input >= 0.0 && dropout_input < 1.0, "dropout_input must be in [0, 1)");
  require(inverse_margin >= 0.0 && inverse_margin < 0.5, "inverse margin must be in [0, 0.5)");
}

Mlp train_mlp(std::span<const float> features, std::size_t d, std::span<const std::int8_t> labels,
              std::span<const float> weights, const TrainConfig& config, std::vector<double>* loss_trace) {
  config.validate();
  require(d >= 1 && features.size() % d == 0, "feature block is not a whole number of rows");
  const std::size_t n = features.size() / d;
  require(n >= 1, "empty training set");
  require(labels.size() == n * 3, "one label triple per training record is required");

  std::vector<std::size_t> sizes{d};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(3);
  Mlp mlp = Mlp::initialized(sizes, mix_seed(config.seed, 1));
  mlp.dropout_hidden = config.dropout_hidden;
  mlp.dropout_input = config.dropout_input;
  mlp.inverse_margin = config.inverse_margin;

  BalancedSampler sampler(labels, weights, mix_seed(config.seed, 2));
  Rng dropout_rng(mix_seed(config.seed, 3));

  const std::size_t B = config.batch_size;
  std::vector<std::size_t> picks(B);
  std::vector<float> inputs(B * d), targets(B * 3);
  std::vector<std::uint8_t> valid(B * 3);
  std::vector<DropoutMasks<float>> masks(B);
  const auto lo = static_cast<float>(config.inverse_margin), hi = static_cast<float>(1.0 - config.inverse_margin);
  const auto lr = static_cast<float>(config.learning_rate);
  Mlp grad = Mlp::zeros(sizes);
  double block_loss = 0.0;

  for (std::size_t u = 0; u < config.updates; ++u) {
    sampler.draw(picks);
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t r = picks[b];
      std::copy(features.begin() + static_cast<std::ptrdiff_t>(r * d),
                features.begin() + static_cast<std::ptrdiff_t>((r + 1) * d),
                inputs.begin() + static_cast<std::ptrdiff_t>(b * d));
      for (std::size_t e = 0; e < 3; ++e) {
        const std::int8_t l = labels[r * 3 + e];
        valid[b * 3 + e] = l != 0;
        targets[b * 3 + e] = l > 0 ? hi : lo;
      }
      masks[b] = sample_dropout(mlp, config.dropout_input, config.dropout_hidden, dropout_rng);
    }
    const Batch<float> batch{B, inputs, targets, valid, masks};
    block_loss += loss_and_gradient(mlp, batch, grad);
    for (std::size_t l = 0; l < mlp.layers(); ++l) {
      for (std::size_t i = 0; i < mlp.weights[l].size(); ++i) mlp.weights[l][i] -= lr * grad.weights[l][i];
      for (std::size_t i = 0; i < mlp.biases[l].size(); ++i) mlp.biases[l][i] -= lr * grad.biases[l][i];
    }
    if (loss_trace != nullptr && (u + 1) % 1000 == 0) {
      loss_trace->push_back(block_loss / 1000.0);
      block_loss = 0.0;
    }
  }
  return mlp;
}

}  // namespace dawmr
