// Command-line driver: gen | learn-dict | extract | train | recurse | predict | evaluate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dawmr/bundle.hpp"
#include "dawmr/config.hpp"
#include "dawmr/sampling.hpp"
#include "dawmr/synthetic.hpp"
#include "dawmr/volume_io.hpp"

namespace fs = std::filesystem;
using namespace dawmr;

namespace {

struct RunOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string catalog;
  std::string run_dir;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_path, "Run configuration file");
  cmd->add_option("--set", o.overrides, "Override one config entry, key=value");
  cmd->add_option("--catalog", o.catalog, "Training catalog")->required();
  cmd->add_option("--run", o.run_dir, "Run directory")->required();
}

RunConfig resolve_config(const RunOptions& o) {
  RunConfig config = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// Creates the fixed run layout and stores the effective config.
void open_run(const std::string& dir, const RunConfig& config) {
  for (const char* sub : {"models", "shards", "predictions", "metrics"}) fs::create_directories(fs::path(dir) / sub);
  write_text(dir + "/config.txt", config.to_text());
}

std::vector<TrainingVolume> load_training_set(const std::string& catalog_path, bool augment) {
  const fs::path base = fs::path(catalog_path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
  std::vector<TrainingVolume> volumes;
  for (const CatalogEntry& e : read_catalog(catalog_path)) {
    Volume image = read_volume(resolve(e.image_path));
    SegmentationVolume truth = read_segmentation(resolve(e.segmentation_path));
    volumes.push_back(make_training_volume(std::move(image), std::move(truth), e.labeled));
  }
  return augment ? augment_training_set(volumes) : volumes;
}

std::string ints(const std::array<std::int64_t, 3>& v) {
  return std::to_string(v[0]) + " " + std::to_string(v[1]) + " " + std::to_string(v[2]);
}

void write_run_manifest(const std::string& dir, const std::string& command, const DawmrModel* model,
                        const std::string& extra = "") {
  std::ostringstream m;
  m << "command = " << command << '\n';
  m << "config = config.txt\n";
  if (model != nullptr) {
    m << "models = models\n";
    m << "stages = " << model->iterations.size() << '\n';
    const auto per = iteration_fov(*model);
    for (std::size_t i = 0; i < per.size(); ++i) m << "fov_iter" << i + 1 << " = " << ints(per[i]) << '\n';
    m << "fov = " << ints(field_of_view(*model)) << '\n';
    m << "fov_strict = " << ints(strict_field_of_view(*model)) << '\n';
  }
  m << extra;
  write_text(dir + "/manifest.txt", m.str());
}

Dims parse_dims(const std::string& text) {
  std::vector<std::size_t> v;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    try {
      const long long n = std::stoll(part);
      if (n < 1) throw ValidationError("--dims entries must be >= 1");
      v.push_back(static_cast<std::size_t>(n));
    } catch (const std::logic_error&) {
      throw ValidationError("--dims expects N or X,Y,Z, got '" + text + "'");
    }
  }
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw ValidationError("--dims expects N or X,Y,Z, got '" + text + "'");
}

void save_prediction(const Prediction& p, const std::string& path) {
  write_volume(p.affinity, path);
  write_box(p.valid, path + ".box");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep and wide multiscale recursive networks for 3D affinity labeling"};
  app.require_subcommand(1);

  // gen
  std::string gen_dims = "32", gen_image = "image.dwmr", gen_truth = "truth.dwmr";
  SyntheticParams gen;
  std::vector<std::int64_t> faint;
  auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic image and ground-truth segmentation");
  cmd_gen->add_option("--dims", gen_dims, "N or X,Y,Z");
  cmd_gen->add_option("--seeds", gen.num_seeds, "Number of Voronoi seeds");
  cmd_gen->add_option("--seed", gen.seed, "Random seed");
  cmd_gen->add_option("--boundary", gen.boundary_width, "Boundary width in voxels");
  cmd_gen->add_option("--noise", gen.noise_sigma, "Gaussian noise sigma");
  cmd_gen->add_option("--blur", gen.blur_sigma, "Gaussian blur sigma");
  cmd_gen->add_option("--faint", faint, "Low-contrast box x0 y0 z0 x1 y1 z1")->expected(6);
  cmd_gen->add_option("--faint-contrast", gen.faint_contrast, "Fraction of the interior/boundary contrast kept inside the low-contrast box");
  cmd_gen->add_option("--image", gen_image, "Output image path");
  cmd_gen->add_option("--truth", gen_truth, "Output segmentation path");

  RunOptions learn_opts, extract_opts, train_opts, recurse_opts;
  auto* cmd_learn = app.add_subcommand("learn-dict", "Learn the first-iteration dictionaries");
  add_run_options(cmd_learn, learn_opts);
  auto* cmd_extract = app.add_subcommand("extract", "Precompute first-iteration feature shards");
  add_run_options(cmd_extract, extract_opts);
  auto* cmd_train = app.add_subcommand("train", "Train a single network iteration");
  add_run_options(cmd_train, train_opts);
  auto* cmd_recurse = app.add_subcommand("recurse", "Train a recursive stack of iterations");
  add_run_options(cmd_recurse, recurse_opts);
  int recurse_iterations = 0;
  std::string recurse_led;
  cmd_recurse->add_option("--iterations", recurse_iterations, "Number of iterations");
  cmd_recurse->add_option("--led", recurse_led, "LED weighting on|off");

  std::string model_dir, predict_image, predict_out = "prediction.dwmr";
  int predict_workers = 1;
  std::int64_t predict_tile = 32;
  bool predict_all = false;
  auto* cmd_predict = app.add_subcommand("predict", "Predict an affinity graph with a trained model");
  cmd_predict->add_option("--model", model_dir, "Model bundle directory")->required();
  cmd_predict->add_option("--image", predict_image, "Input image")->required();
  cmd_predict->add_option("--out", predict_out, "Output affinity volume");
  cmd_predict->add_option("--workers", predict_workers, "Worker threads");
  cmd_predict->add_option("--tile", predict_tile, "Inference tile side");
  cmd_predict->add_flag("--all", predict_all, "Also write every intermediate iteration");

  std::string eval_pred, eval_truth, eval_out = "metrics.txt", eval_table;
  EvaluationOptions eval_opts;
  std::string eval_mode = "foreground_restricted";
  auto* cmd_eval = app.add_subcommand("evaluate", "Score a prediction against a ground-truth segmentation");
  cmd_eval->add_option("--pred", eval_pred, "Predicted affinity volume")->required();
  cmd_eval->add_option("--truth", eval_truth, "Ground-truth segmentation")->required();
  cmd_eval->add_option("--out", eval_out, "Metrics report path");
  cmd_eval->add_option("--table", eval_table, "Per-threshold rand table path");
  cmd_eval->add_option("--quantiles", eval_opts.quantiles, "Quantile count of the threshold sweep");
  cmd_eval->add_option("--rand-mode", eval_mode, "foreground_restricted|all_pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string invocation;
  for (int i = 1; i < argc; ++i) invocation += (i > 1 ? " " : "") + std::string(argv[i]);

  try {
    if (*cmd_gen) {
      gen.dims = parse_dims(gen_dims);
      if (!faint.empty()) gen.faint_region = Box{{faint[0], faint[1], faint[2]}, {faint[3], faint[4], faint[5]}};
      const SyntheticVolume s = generate_synthetic(gen);
      write_volume(s.image, gen_image);
      write_segmentation(s.truth, gen_truth);
      std::cout << "wrote " << gen_image << " and " << gen_truth << '\n';
    } else if (*cmd_learn) {
      const RunConfig config = resolve_config(learn_opts);
      open_run(learn_opts.run_dir, config);
      const auto volumes = load_training_set(learn_opts.catalog, config.augment);
      const LearnedFeatures f = learn_features(volumes, config.recursive.iteration, 1);
      const ExtractorSpec& spec = f.extractor.spec();
      std::string listing;
      for (std::size_t si = 0; si < spec.scales.size(); ++si) {
        const std::string name = "models/dict_s" + std::to_string(si) + ".dwdc";
        write_dictionary(f.extractor.dictionary(si, 0), spec.encoder.alpha, learn_opts.run_dir + "/" + name);
        listing += "dictionary = " + name + "\n";
        std::cout << "wrote " << name << " (k = " << f.extractor.dictionary(si, 0).k() << ")\n";
      }
      write_run_manifest(learn_opts.run_dir, invocation, nullptr, listing);
    } else if (*cmd_extract) {
      RunConfig config = resolve_config(extract_opts);
      open_run(extract_opts.run_dir, config);
      config.recursive.iteration.shard_dir = extract_opts.run_dir + "/shards";
      const auto volumes = load_training_set(extract_opts.catalog, config.augment);
      const PreparedIteration p = prepare_iteration(volumes, config.recursive.iteration, 1);
      write_normalizer(p.normalizer, extract_opts.run_dir + "/models/normalizer.dwnm");
      write_run_manifest(extract_opts.run_dir, invocation, nullptr,
                         "records = " + std::to_string(p.records.size()) + "\nfeature_dims = " +
                             std::to_string(p.records.d) + "\nshards = shards\n");
      std::cout << p.records.size() << " records of dimension " << p.records.d << '\n';
    } else if (*cmd_train) {
      RunConfig config = resolve_config(train_opts);
      open_run(train_opts.run_dir, config);
      config.recursive.iteration.shard_dir = train_opts.run_dir + "/shards";
      const auto volumes = load_training_set(train_opts.catalog, config.augment);
      DawmrModel model;
      model.iterations.push_back(train_iteration(volumes, config.recursive.iteration, 1));
      save_model(model, train_opts.run_dir + "/models");
      write_run_manifest(train_opts.run_dir, invocation, &model);
      std::cout << "trained 1 iteration, fov " << ints(field_of_view(model)) << '\n';
    } else if (*cmd_recurse) {
      if (recurse_iterations != 0) recurse_opts.overrides.push_back("iterations=" + std::to_string(recurse_iterations));
      if (!recurse_led.empty()) recurse_opts.overrides.push_back("led=" + recurse_led);
      RunConfig config = resolve_config(recurse_opts);
      open_run(recurse_opts.run_dir, config);
      config.recursive.iteration.shard_dir = recurse_opts.run_dir + "/shards";
      auto volumes = load_training_set(recurse_opts.catalog, config.augment);
      const DawmrModel model = train_recursive(std::move(volumes), config.recursive);
      save_model(model, recurse_opts.run_dir + "/models");
      write_run_manifest(recurse_opts.run_dir, invocation, &model);
      std::cout << "trained " << model.iterations.size() << " iterations, fov " << ints(field_of_view(model))
                << " (strict " << ints(strict_field_of_view(model)) << ")\n";
    } else if (*cmd_predict) {
      const DawmrModel model = load_model(model_dir);
      const Volume image = read_volume(predict_image);
      const auto preds = infer_model(model, image, {predict_workers, predict_tile});
      save_prediction(preds.back(), predict_out);
      if (predict_all)
        for (std::size_t i = 0; i + 1 < preds.size(); ++i)
          save_prediction(preds[i], predict_out + ".iter" + std::to_string(i + 1));
      std::cout << "wrote " << predict_out << " (valid " << to_string(preds.back().valid) << ")\n";
    } else if (*cmd_eval) {
      if (eval_mode != "foreground_restricted" && eval_mode != "all_pairs")
        throw ValidationError("--rand-mode expects foreground_restricted or all_pairs");
      eval_opts.mode = eval_mode == "all_pairs" ? RandMode::all_pairs : RandMode::foreground_restricted;
      const AffinityGraph pred = read_volume(eval_pred);
      const SegmentationVolume truth = read_segmentation(eval_truth);
      if (pred.channels() != 3) throw ValidationError(eval_pred + ": expected a 3-channel affinity volume");
      if (pred.dims() != truth.dims()) throw ValidationError(eval_pred + ": dims differ from " + eval_truth);
      const Box valid = fs::exists(eval_pred + ".box") ? read_box(eval_pred + ".box") : pred.box();
      const MetricsReport report = evaluate_prediction(pred, valid, truth, eval_opts);
      write_text(eval_out, format_metrics(report));
      if (!eval_table.empty()) write_text(eval_table, format_rand_table(report.curve));
      std::cout << format_metrics(report);
    }
  } catch (const ValidationError& e) {
    std::cerr << "dawmr " << command << ": " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "dawmr " << command << ": " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "dawmr " << command << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
