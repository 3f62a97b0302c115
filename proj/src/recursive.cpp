#include "dawmr/recursive.hpp"

#include <cmath>

namespace dawmr {

void RecursiveConfig::validate() const {
  require(iterations >= 1, "iterations must be >= 1");
  require(preview_fraction > 0.0 && preview_fraction <= 1.0, "preview fraction must be in (0, 1]");
  require(led_options.multiplier >= 1.0, "LED multiplier must be >= 1");
  iteration.validate();
}

std::size_t preview_updates(const RecursiveConfig& config) {
  return static_cast<std::size_t>(std::llround(config.preview_fraction * static_cast<double>(config.iteration.train.updates)));
}

DawmrModel train_recursive(std::vector<TrainingVolume> volumes, const RecursiveConfig& config) {
  config.validate();
  require(!volumes.empty(), "no training volumes");
  DawmrModel model;
  if (config.led) {
    model.led_masks.reserve(volumes.size());
    for (const TrainingVolume& v : volumes) model.led_masks.emplace_back(v.image.dims(), 1, std::uint8_t{0});
  }
  const InferenceOptions infer{config.iteration.workers, 32};

  for (int i = 1; i <= config.iterations; ++i) {
    const PreparedIteration prepared = prepare_iteration(volumes, config.iteration, i);
    std::vector<float> weights;
    if (config.led) {
      TrainConfig preview = config.iteration.train;
      preview.updates = preview_updates(config);
      preview.seed = iteration_train_seed(config.iteration, i, true);
      const IterationModel preview_model = train_prepared(prepared, preview);
      for (std::size_t v = 0; v < volumes.size(); ++v) {
        const TrainingVolume& vol = volumes[v];
        const Prediction input{vol.affinity, vol.input_valid};
        const Prediction p = infer_iteration(preview_model, vol.image, i >= 2 ? &input : nullptr, infer);
        const VoxelMask mask = compute_led_mask(p.affinity, vol.labels, config.led_options,
                                                p.valid.intersect(vol.labeled));
        model.led_masks[v] = merge_masks(model.led_masks[v], mask);
      }
      weights = led_weights(prepared, model.led_masks, config.led_options.multiplier);
    }
    TrainConfig train = config.iteration.train;
    train.seed = iteration_train_seed(config.iteration, i);
    model.iterations.push_back(train_prepared(prepared, train, weights));

    if (i == config.iterations) break;
    for (TrainingVolume& vol : volumes) {
      const Prediction input{vol.affinity, vol.input_valid};
      Prediction p = infer_iteration(model.iterations.back(), vol.image, i >= 2 ? &input : nullptr, infer);
      vol.affinity = std::move(p.affinity);
      vol.input_valid = p.valid;
    }
  }
  return model;
}

std::vector<Prediction> infer_model(const DawmrModel& model, const Volume& image, const InferenceOptions& options) {
  require(!model.iterations.empty(), "model has no iterations");
  std::vector<Prediction> out;
  for (const IterationModel& it : model.iterations)
    out.push_back(infer_iteration(it, image, out.empty() ? nullptr : &out.back(), options));
  return out;
}

std::vector<std::array<std::int64_t, 3>> iteration_fov(const DawmrModel& model) {
  std::vector<std::array<std::int64_t, 3>> out;
  for (const IterationModel& it : model.iterations) out.push_back(field_of_view(it.extractor.spec()));
  return out;
}

std::array<std::int64_t, 3> field_of_view(const DawmrModel& model) {
  std::array<std::int64_t, 3> total{0, 0, 0};
  for (const auto& f : iteration_fov(model))
    for (std::size_t a = 0; a < 3; ++a) total[a] += f[a];
  return total;
}

std::array<std::int64_t, 3> strict_field_of_view(const DawmrModel& model) {
  std::array<std::int64_t, 3> total{0, 0, 0};
  bool first = true;
  for (const auto& f : iteration_fov(model)) {
    for (std::size_t a = 0; a < 3; ++a) total[a] += first ? f[a] : f[a] - 1;
    first = false;
  }
  return total;
}

Box composed_fov_box(const DawmrModel& model, const Coord& l) {
  require(!model.iterations.empty(), "model has no iterations");
  // Walk backwards: the box read by iteration i covers every location whose
  // prediction iteration i + 1 consumed. fov_box is monotone in l, so the
  // corners of a box bound the union over its locations.
  Box box{l, {l.x + 1, l.y + 1, l.z + 1}};
  for (auto it = model.iterations.rbegin(); it != model.iterations.rend(); ++it) {
    const ExtractorSpec& spec = it->extractor.spec();
    const Box lo = fov_box(spec, box.lo);
    const Box hi = fov_box(spec, {box.hi.x - 1, box.hi.y - 1, box.hi.z - 1});
    box = {lo.lo, hi.hi};
  }
  return box;
}

}  // namespace dawmr
