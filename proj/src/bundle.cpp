#include "dawmr/bundle.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dawmr/volume_io.hpp"

namespace dawmr {

namespace {

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const auto& values) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : " ") + std::to_string(v);
  return out;
}

std::string group_name(InputGroup g) { return g == InputGroup::image ? "image" : "affinity"; }

class Manifest {
 public:
  void set(const std::string& key, const std::string& value) {
    order_.push_back(key);
    values_[key] = value;
  }

  std::string get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw FormatError("model manifest lacks key '" + key + "'");
    return it->second;
  }

  std::istringstream stream(const std::string& key) const { return std::istringstream(get(key)); }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const std::string& k : order_) out << k << " = " << values_.at(k) << '\n';
    if (!out) throw IoError("write failed: " + path);
  }

  static Manifest read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model manifest: " + path);
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find(" = ");
      if (line.empty()) continue;
      if (eq == std::string::npos) throw FormatError(path + ": malformed line '" + line + "'");
      m.set(line.substr(0, eq), line.substr(eq + 3));
    }
    return m;
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

template <typename T>
T parse(std::istringstream& in, const std::string& key) {
  T v;
  if (!(in >> v)) throw FormatError("model manifest: bad value for '" + key + "'");
  return v;
}

}  // namespace

void save_model(const DawmrModel& model, const std::string& dir) {
  require(!model.iterations.empty(), "cannot save a model without iterations");
  std::filesystem::create_directories(dir);
  Manifest m;
  m.set("format", "dawmr-model 1");
  m.set("iterations", std::to_string(model.iterations.size()));
  m.set("fov", join_ints(field_of_view(model)));
  m.set("fov_strict", join_ints(strict_field_of_view(model)));
  for (std::size_t i = 0; i < model.iterations.size(); ++i) {
    const IterationModel& it = model.iterations[i];
    const ExtractorSpec& s = it.extractor.spec();
    const std::string p = "iter" + std::to_string(i + 1) + ".";
    m.set(p + "index", std::to_string(it.index));
    m.set(p + "fov", join_ints(field_of_view(s)));
    m.set(p + "patch", join_ints(s.patch.size));
    m.set(p + "representation", to_string(s.representation));
    m.set(p + "neighborhood", join_ints(s.neighborhood));
    m.set(p + "pooling", to_string(s.pooling));
    m.set(p + "scales", join_ints(s.scales));
    m.set(p + "encoder", s.encoder.kind == EncoderKind::soft_threshold_polarity ? "soft_threshold_polarity"
                                                                                : "triangle_kmeans");
    m.set(p + "alpha", exact(s.encoder.alpha));
    std::string groups;
    for (const ChannelGroup& g : s.groups)
      groups += (groups.empty() ? "" : " ") + group_name(g.input) + ":" + std::to_string(g.channels) + ":" +
                std::to_string(g.dict_size);
    m.set(p + "groups", groups);
    m.set(p + "feature_dims", std::to_string(it.extractor.dims()));
    m.set(p + "image_scaling", exact(it.scaling.mean) + " " + exact(it.scaling.std));
    std::string dicts;
    for (std::size_t si = 0; si < s.scales.size(); ++si)
      for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const std::string name = p + "s" + std::to_string(si) + "g" + std::to_string(g) + ".dwdc";
        write_dictionary(it.extractor.dictionary(si, g), s.encoder.alpha, dir + "/" + name);
        dicts += (dicts.empty() ? "" : " ") + name;
      }
    m.set(p + "dictionaries", dicts);
    write_normalizer(it.normalizer, dir + "/" + p + "dwnm");
    m.set(p + "normalizer", p + "dwnm");
    write_mlp(it.mlp, dir + "/" + p + "dwmp");
    m.set(p + "mlp", p + "dwmp");
  }
  m.set("led_masks", std::to_string(model.led_masks.size()));
  for (std::size_t v = 0; v < model.led_masks.size(); ++v) {
    const VoxelMask& mask = model.led_masks[v];
    SegmentationVolume as_ids(mask.dims(), 1, 0u);
    for (std::size_t i = 0; i < mask.storage().size(); ++i) as_ids.storage()[i] = mask.storage()[i];
    const std::string name = "led_mask" + std::to_string(v) + ".dwmr";
    write_segmentation(as_ids, dir + "/" + name);
  }
  m.write(dir + "/manifest.txt");
}

DawmrModel load_model(const std::string& dir) {
  const Manifest m = Manifest::read(dir + "/manifest.txt");
  if (m.get("format") != "dawmr-model 1") throw FormatError(dir + ": unsupported model bundle format");
  auto count_in = m.stream("iterations");
  const auto k = parse<std::size_t>(count_in, "iterations");
  DawmrModel model;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string p = "iter" + std::to_string(i + 1) + ".";
    IterationModel it;
    auto idx = m.stream(p + "index");
    it.index = parse<int>(idx, p + "index");

    ExtractorSpec s;
    auto patch = m.stream(p + "patch");
    for (int& v : s.patch.size) v = parse<int>(patch, p + "patch");
    const std::string rep = m.get(p + "representation");
    if (rep != "rf" && rep != "foveated") throw FormatError("model manifest: bad representation");
    s.representation = rep == "rf" ? Representation::rf : Representation::foveated;
    auto nb = m.stream(p + "neighborhood");
    for (int& v : s.neighborhood) v = parse<int>(nb, p + "neighborhood");
    const std::string pool = m.get(p + "pooling");
    if (pool != "max" && pool != "average") throw FormatError("model manifest: bad pooling");
    s.pooling = pool == "max" ? PoolingMode::max : PoolingMode::average;
    s.scales.clear();
    auto sc = m.stream(p + "scales");
    for (int v; sc >> v;) s.scales.push_back(v);
    const std::string enc = m.get(p + "encoder");
    if (enc != "soft_threshold_polarity" && enc != "triangle_kmeans") throw FormatError("model manifest: bad encoder");
    s.encoder.kind = enc == "triangle_kmeans" ? EncoderKind::triangle_kmeans : EncoderKind::soft_threshold_polarity;
    auto alpha = m.stream(p + "alpha");
    s.encoder.alpha = parse<double>(alpha, p + "alpha");
    auto groups = m.stream(p + "groups");
    for (std::string g; groups >> g;) {
      const auto c1 = g.find(':'), c2 = g.rfind(':');
      if (c1 == std::string::npos || c1 == c2) throw FormatError("model manifest: bad channel group '" + g + "'");
      ChannelGroup cg;
      const std::string name = g.substr(0, c1);
      if (name != "image" && name != "affinity") throw FormatError("model manifest: bad channel group '" + g + "'");
      cg.input = name == "image" ? InputGroup::image : InputGroup::affinity;
      cg.channels = std::stoul(g.substr(c1 + 1, c2 - c1 - 1));
      cg.dict_size = std::stoul(g.substr(c2 + 1));
      s.groups.push_back(cg);
    }
    auto scaling = m.stream(p + "image_scaling");
    it.scaling.mean = parse<double>(scaling, p + "image_scaling");
    it.scaling.std = parse<double>(scaling, p + "image_scaling");

    std::vector<Dictionary> dicts;
    auto names = m.stream(p + "dictionaries");
    for (std::string name; names >> name;) dicts.push_back(read_dictionary(dir + "/" + name));
    try {
      it.extractor = FeatureExtractor(s, std::move(dicts));
    } catch (const ValidationError& e) {
      throw FormatError(dir + ": inconsistent iteration " + std::to_string(i + 1) + ": " + e.what());
    }
    it.normalizer = read_normalizer(dir + "/" + m.get(p + "normalizer"));
    it.mlp = read_mlp(dir + "/" + m.get(p + "mlp"));
    if (it.normalizer.dims() != it.extractor.dims() || it.mlp.input_dim() != it.extractor.dims())
      throw FormatError(dir + ": feature dims disagree in iteration " + std::to_string(i + 1));
    model.iterations.push_back(std::move(it));
  }
  auto masks = m.stream("led_masks");
  const auto nm = parse<std::size_t>(masks, "led_masks");
  for (std::size_t v = 0; v < nm; ++v) {
    const SegmentationVolume ids = read_segmentation(dir + "/led_mask" + std::to_string(v) + ".dwmr");
    VoxelMask mask(ids.dims(), 1, 0);
    for (std::size_t i = 0; i < ids.storage().size(); ++i) mask.storage()[i] = ids.storage()[i] != 0;
    model.led_masks.push_back(std::move(mask));
  }
  return model;
}

}  // namespace dawmr
