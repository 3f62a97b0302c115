#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dawmr/mlp.hpp"

namespace dawmr {

struct TrainConfig {
  std::vector<std::size_t> hidden{200};
  double learning_rate = 0.02;
  std::size_t batch_size = 40;
  std::size_t updates = 500000;
  double dropout_hidden = 0.5;
  double dropout_input = 0.0;
  double inverse_margin = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Plain minibatch SGD on mean cross-entropy. `features` is row-major n x d,
// `labels` n x 3 in {-1, 0, +1} (0 = unknown, excluded from the loss), and
// `weights` empty or one sampling multiplier per record. Targets are mapped
// to inverse_margin / 1 - inverse_margin. Runs exactly config.updates steps.
// When `loss_trace` is given it receives the mean batch loss of every block
// of 1000 updates.
Mlp train_mlp(std::span<const float> features, std::size_t d, std::span<const std::int8_t> labels,
              std::span<const float> weights, const TrainConfig& config, std::vector<double>* loss_trace = nullptr);

}  // namespace dawmr
