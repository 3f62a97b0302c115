#include "dawmr/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace dawmr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ValidationError("config key '" + key + "': " + why + " (got '" + value + "')");
}

std::vector<std::string> words(const std::string& value) {
  std::istringstream in(value);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) bad(key, text, "expected a number");
    return v;
  } catch (const std::logic_error&) {
    bad(key, text, "expected a number");
  }
}

long long to_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) bad(key, text, "expected an integer");
    return v;
  } catch (const std::logic_error&) {
    bad(key, text, "expected an integer");
  }
}

long long positive(const std::string& key, const std::string& text) {
  const long long v = to_int(key, text);
  if (v < 1) bad(key, text, "must be >= 1");
  return v;
}

bool on_off(const std::string& key, const std::string& text) {
  if (text == "on") return true;
  if (text == "off") return false;
  bad(key, text, "expected 'on' or 'off'");
}

// "5" or "5 5 1".
std::array<int, 3> triple(const std::string& key, const std::string& value) {
  const auto w = words(value);
  if (w.size() != 1 && w.size() != 3) bad(key, value, "expected one or three integers");
  std::array<int, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const long long v = positive(key, w[w.size() == 1 ? 0 : a]);
    if (v % 2 == 0) bad(key, value, "sides must be odd");
    out[a] = static_cast<int>(v);
  }
  return out;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ints(const auto& values) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : " ") + std::to_string(v);
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  recursive.iteration.scales = {1, 2};
  recursive.iteration.dict_size = 1000;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  IterationConfig& it = recursive.iteration;
  TrainConfig& tr = it.train;
  if (key == "patch_size") {
    it.patch.size = triple(key, value);
  } else if (key == "neighborhood") {
    it.neighborhood = triple(key, value);
  } else if (key == "scales") {
    std::vector<int> scales;
    for (const std::string& w : words(value)) scales.push_back(static_cast<int>(positive(key, w)));
    if (scales.empty()) bad(key, value, "expected at least one scale");
    for (std::size_t i = 1; i < scales.size(); ++i)
      if (scales[i] <= scales[i - 1]) bad(key, value, "scales must be strictly increasing");
    it.scales = scales;
  } else if (key == "representation") {
    if (value != "rf" && value != "foveated") bad(key, value, "expected 'rf' or 'foveated'");
    it.representation = value == "rf" ? Representation::rf : Representation::foveated;
  } else if (key == "pooling") {
    if (value != "max" && value != "average") bad(key, value, "expected 'max' or 'average'");
    it.pooling = value == "max" ? PoolingMode::max : PoolingMode::average;
  } else if (key == "dict_size") {
    it.dict_size = static_cast<std::size_t>(positive(key, value));
  } else if (key == "encoder") {
    if (value == "omp1_soft") {
      it.method = DictionaryMethod::omp1;
      it.encoder.kind = EncoderKind::soft_threshold_polarity;
    } else if (value == "kmeans_triangle") {
      it.method = DictionaryMethod::kmeans;
      it.encoder.kind = EncoderKind::triangle_kmeans;
    } else {
      bad(key, value, "expected 'omp1_soft' or 'kmeans_triangle'");
    }
  } else if (key == "alpha") {
    it.encoder.alpha = to_double(key, value);
    if (it.encoder.alpha < 0) bad(key, value, "must be >= 0");
  } else if (key == "whitening") {
    it.whitening = on_off(key, value);
  } else if (key == "eps_zca") {
    it.whitening_options.eps_zca = to_double(key, value);
    if (it.whitening_options.eps_zca < 0) bad(key, value, "must be >= 0");
  } else if (key == "eps_cn") {
    it.whitening_options.eps_cn = to_double(key, value);
    if (it.whitening_options.eps_cn < 0) bad(key, value, "must be >= 0");
  } else if (key == "contrast_normalize") {
    it.whitening_options.contrast_normalize = on_off(key, value);
  } else if (key == "dict_epochs") {
    it.dict_epochs = static_cast<int>(positive(key, value));
  } else if (key == "dict_patches") {
    it.dict_patches = static_cast<std::size_t>(positive(key, value));
  } else if (key == "feature_dims") {
    stated_feature_dims_ = static_cast<std::size_t>(positive(key, value));
  } else if (key == "hidden_layers") {
    const auto n = static_cast<std::size_t>(positive(key, value));
    tr.hidden.assign(n, tr.hidden.empty() ? 200 : tr.hidden.front());
  } else if (key == "hidden_units") {
    const auto h = static_cast<std::size_t>(positive(key, value));
    for (std::size_t& x : tr.hidden) x = h;
  } else if (key == "learning_rate") {
    tr.learning_rate = to_double(key, value);
    if (tr.learning_rate < 0) bad(key, value, "must be >= 0");
  } else if (key == "batch_size") {
    tr.batch_size = static_cast<std::size_t>(positive(key, value));
  } else if (key == "updates") {
    const long long u = to_int(key, value);
    if (u < 0) bad(key, value, "must be >= 0");
    tr.updates = static_cast<std::size_t>(u);
  } else if (key == "dropout_hidden" || key == "dropout_input") {
    const double r = to_double(key, value);
    if (r < 0 || r >= 1) bad(key, value, "must be in [0, 1)");
    (key == "dropout_hidden" ? tr.dropout_hidden : tr.dropout_input) = r;
  } else if (key == "inverse_margin") {
    tr.inverse_margin = to_double(key, value);
    if (tr.inverse_margin < 0 || tr.inverse_margin >= 0.5) bad(key, value, "must be in [0, 0.5)");
  } else if (key == "iterations") {
    recursive.iterations = static_cast<int>(positive(key, value));
  } else if (key == "led") {
    recursive.led = on_off(key, value);
  } else if (key == "led_window") {
    recursive.led_options.window = triple(key, value);
  } else if (key == "led_frac") {
    recursive.led_options.frac = to_double(key, value);
    if (recursive.led_options.frac < 0 || recursive.led_options.frac >= 1) bad(key, value, "must be in [0, 1)");
  } else if (key == "led_multiplier") {
    recursive.led_options.multiplier = to_double(key, value);
    if (recursive.led_options.multiplier < 1) bad(key, value, "must be >= 1");
  } else if (key == "preview_fraction") {
    recursive.preview_fraction = to_double(key, value);
    if (recursive.preview_fraction <= 0 || recursive.preview_fraction > 1) bad(key, value, "must be in (0, 1]");
  } else if (key == "augment") {
    augment = on_off(key, value);
  } else if (key == "subsample_fraction") {
    it.subsample_fraction = to_double(key, value);
    if (it.subsample_fraction <= 0 || it.subsample_fraction > 1) bad(key, value, "must be in (0, 1]");
  } else if (key == "normalizer_sample") {
    it.normalizer_sample = static_cast<std::size_t>(positive(key, value));
    if (it.normalizer_sample < 2) bad(key, value, "must be >= 2");
  } else if (key == "seed") {
    const long long s = to_int(key, value);
    if (s < 0) bad(key, value, "must be >= 0");
    it.seed = static_cast<std::uint64_t>(s);
  } else if (key == "shard_count") {
    it.shard_count = static_cast<std::size_t>(positive(key, value));
  } else if (key == "workers") {
    it.workers = static_cast<int>(positive(key, value));
  } else if (key == "tile") {
    tile = positive(key, value);
  } else if (key == "quantiles") {
    evaluation.quantiles = static_cast<std::size_t>(positive(key, value));
    if (evaluation.quantiles < 2) bad(key, value, "must be >= 2");
  } else if (key == "rand_mode") {
    if (value != "foreground_restricted" && value != "all_pairs")
      bad(key, value, "expected 'foreground_restricted' or 'all_pairs'");
    evaluation.mode = value == "all_pairs" ? RandMode::all_pairs : RandMode::foreground_restricted;
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

std::size_t RunConfig::feature_dims() const {
  return representation_dims(spec_for_iteration(recursive.iteration, 1));
}

void RunConfig::validate() const {
  recursive.validate();
  if (stated_feature_dims_ != 0 && stated_feature_dims_ != feature_dims())
    throw ValidationError("config key 'feature_dims': stated " + std::to_string(stated_feature_dims_) +
                          " but the representation yields " + std::to_string(feature_dims()));
  if (recursive.iterations >= 2)
    require(recursive.iteration.dict_size >= 2, "config key 'dict_size': recursion needs at least 2");
}

std::string RunConfig::to_text() const {
  const IterationConfig& it = recursive.iteration;
  const TrainConfig& tr = it.train;
  std::ostringstream out;
  auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
  kv("patch_size", ints(it.patch.size));
  kv("neighborhood", ints(it.neighborhood));
  kv("scales", ints(it.scales));
  kv("representation", to_string(it.representation));
  kv("pooling", to_string(it.pooling));
  kv("dict_size", std::to_string(it.dict_size));
  kv("encoder", it.encoder.kind == EncoderKind::triangle_kmeans ? "kmeans_triangle" : "omp1_soft");
  kv("alpha", exact(it.encoder.alpha));
  kv("whitening", it.whitening ? "on" : "off");
  kv("contrast_normalize", it.whitening_options.contrast_normalize ? "on" : "off");
  kv("eps_zca", exact(it.whitening_options.eps_zca));
  kv("eps_cn", exact(it.whitening_options.eps_cn));
  kv("dict_epochs", std::to_string(it.dict_epochs));
  kv("dict_patches", std::to_string(it.dict_patches));
  kv("feature_dims", std::to_string(feature_dims()));
  kv("hidden_layers", std::to_string(tr.hidden.size()));
  kv("hidden_units", std::to_string(tr.hidden.front()));
  kv("learning_rate", exact(tr.learning_rate));
  kv("batch_size", std::to_string(tr.batch_size));
  kv("updates", std::to_string(tr.updates));
  kv("dropout_hidden", exact(tr.dropout_hidden));
  kv("dropout_input", exact(tr.dropout_input));
  kv("inverse_margin", exact(tr.inverse_margin));
  kv("iterations", std::to_string(recursive.iterations));
  kv("led", recursive.led ? "on" : "off");
  kv("led_window", ints(recursive.led_options.window));
  kv("led_frac", exact(recursive.led_options.frac));
  kv("led_multiplier", exact(recursive.led_options.multiplier));
  kv("preview_fraction", exact(recursive.preview_fraction));
  kv("augment", augment ? "on" : "off");
  kv("subsample_fraction", exact(it.subsample_fraction));
  kv("normalizer_sample", std::to_string(it.normalizer_sample));
  kv("seed", std::to_string(it.seed));
  kv("shard_count", std::to_string(it.shard_count));
  kv("workers", std::to_string(it.workers));
  kv("tile", std::to_string(tile));
  kv("quantiles", std::to_string(evaluation.quantiles));
  kv("rand_mode", evaluation.mode == RandMode::all_pairs ? "all_pairs" : "foreground_restricted");
  return out.str();
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

}  // namespace dawmr
