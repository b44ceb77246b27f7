#include "segclass/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "segclass/image_io.hpp"

namespace segclass {

namespace fs = std::filesystem;

namespace {

std::string replace_all(std::string s, const std::string& key, const std::string& value) {
  for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
    s.replace(pos, key.size(), value);
  return s;
}

// Runs `fn`, re-throwing anything but a StageError tagged with the stage and tile.
template <class Fn>
auto in_stage(const std::string& stage, const std::string& tile, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, tile.empty() ? std::string(e.what()) : "tile " + tile + ": " + e.what());
  }
}

void require_file(const std::string& stage, const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw StageError(stage, "missing " + what + " '" + path.string() + "'");
}

std::vector<std::string> all_tiles(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto* list : {&cfg.tiles.train, &cfg.tiles.val, &cfg.tiles.test})
    out.insert(out.end(), list->begin(), list->end());
  return out;
}

std::string algo_dir(Algorithm algo) { return algorithm_name(algo); }

fs::path segmentation_base(const ExperimentConfig& cfg, Algorithm algo, const std::string& tile) {
  return cfg.output_dir / "segmentations" / algo_dir(algo) / tile;
}

// Segmentations go to PNG unless the id range needs the text grid.
fs::path segmentation_file(const ExperimentConfig& cfg, Algorithm algo, const std::string& tile) {
  const fs::path base = segmentation_base(cfg, algo, tile);
  fs::path png = base;
  png += ".png";
  if (fs::exists(png)) return png;
  fs::path txt = base;
  txt += ".txt";
  return fs::exists(txt) ? txt : png;
}

fs::path features_file(const ExperimentConfig& cfg, Algorithm algo, const std::string& tile) {
  return cfg.output_dir / "features" / algo_dir(algo) / (tile + ".txt");
}

fs::path model_file(const ExperimentConfig& cfg, Algorithm algo) {
  return cfg.output_dir / "models" / (algo_dir(algo) + ".model");
}

fs::path map_file(const ExperimentConfig& cfg, Algorithm algo, const std::string& tile) {
  return cfg.output_dir / "maps" / algo_dir(algo) / (tile + ".png");
}

Segmentation load_tile_segmentation(const ExperimentConfig& cfg, Algorithm algo, const std::string& tile,
                                    const std::string& stage) {
  const fs::path path = segmentation_file(cfg, algo, tile);
  require_file(stage, path, "segmentation");
  return in_stage(stage, tile, [&] { return load_segmentation(path); });
}

Palette load_config_palette(const ExperimentConfig& cfg, const std::string& stage) {
  require_file(stage, cfg.palette_path, "palette");
  return in_stage(stage, "", [&] { return load_palette(cfg.palette_path); });
}

LabelMap load_truth(const ExperimentConfig& cfg, const Palette& palette, const std::string& tile,
                    const std::string& stage) {
  const fs::path path = cfg.truth_path(tile);
  require_file(stage, path, "ground truth");
  return in_stage(stage, tile, [&] { return load_labels(path, palette, cfg.unknown_colors_unlabeled); });
}

void require_same_shape(const std::string& stage, const std::string& tile, int h1, int w1, int h2, int w2) {
  if (h1 != h2 || w1 != w2)
    throw StageError(stage, "tile " + tile + ": shape mismatch " + std::to_string(h1) + "x" + std::to_string(w1) +
                                " vs " + std::to_string(h2) + "x" + std::to_string(w2));
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw FormatError("cannot write '" + path.string() + "'");
}

void emit_parameters(YAML::Emitter& e, const ExperimentConfig& cfg, Algorithm algo) {
  e << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
  switch (algo) {
    case Algorithm::kSlic:
      e << YAML::Key << "k" << YAML::Value << cfg.slic.k;
      e << YAML::Key << "compactness" << YAML::Value << cfg.slic.compactness;
      e << YAML::Key << "max_iters" << YAML::Value << cfg.slic.max_iters;
      e << YAML::Key << "min_region_fraction" << YAML::Value << cfg.slic.min_region_fraction;
      break;
    case Algorithm::kLsc:
      e << YAML::Key << "k" << YAML::Value << cfg.lsc.k;
      e << YAML::Key << "ratio" << YAML::Value << cfg.lsc.ratio;
      e << YAML::Key << "max_iters" << YAML::Value << cfg.lsc.max_iters;
      e << YAML::Key << "min_region_fraction" << YAML::Value << cfg.lsc.min_region_fraction;
      break;
    case Algorithm::kQuickshift:
      e << YAML::Key << "kernel_size" << YAML::Value << cfg.quickshift.kernel_size;
      e << YAML::Key << "max_dist" << YAML::Value << cfg.quickshift.max_dist;
      e << YAML::Key << "color_ratio" << YAML::Value << cfg.quickshift.color_ratio;
      break;
    case Algorithm::kSlidingWindow:
      e << YAML::Key << "window" << YAML::Value << cfg.sw.window;
      e << YAML::Key << "stride" << YAML::Value << cfg.sw.stride;
      break;
    case Algorithm::kHswo:
      e << YAML::Key << "target_regions" << YAML::Value << cfg.hswo.target_regions;
      e << YAML::Key << "dissimilarity" << YAML::Value
        << (cfg.hswo.dissimilarity == MergeCriterion::kWard ? "ward" : "mean_distance");
      break;
  }
  e << YAML::EndMap;
}

// ---- config parsing ----

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw StageError("config", "invalid value for '" + key + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& dst, const std::string& prefix = {}) {
  if (const YAML::Node n = map[key]) dst = scalar<T>(n, prefix + key);
}

void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!map.IsMap()) throw StageError("config", "'" + where + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw StageError("config", "unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

std::vector<std::string> read_tiles(const YAML::Node& node, const std::string& key) {
  std::vector<std::string> out;
  if (!node) return out;
  if (!node.IsSequence()) throw StageError("config", "'" + key + "' must be a list");
  for (const auto& item : node) out.push_back(scalar<std::string>(item, key));
  return out;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return (p.is_absolute() ? p : base / p).lexically_normal(); }

}  // namespace

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}

const char* algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kSlic: return "slic";
    case Algorithm::kLsc: return "lsc";
    case Algorithm::kQuickshift: return "quickshift";
    case Algorithm::kSlidingWindow: return "sw";
    case Algorithm::kHswo: return "hswo";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kSlic, Algorithm::kLsc, Algorithm::kQuickshift, Algorithm::kSlidingWindow,
                      Algorithm::kHswo}) {
    if (name == algorithm_name(a)) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected slic, lsc, quickshift, sw or hswo)");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw StageError("config", m); };
  if (algorithms.empty()) fail("no algorithms selected");
  std::set<std::string> seen;
  for (const auto& [name, list] : {std::pair{"train", &tiles.train}, {"val", &tiles.val}, {"test", &tiles.test}}) {
    std::set<std::string> local;
    for (const auto& t : *list) {
      if (!local.insert(t).second) fail(std::string("tile '") + t + "' listed twice in " + name);
      if (!seen.insert(t).second) fail("tile '" + t + "' appears in more than one split");
    }
  }
  if (eval_split != "train" && eval_split != "val" && eval_split != "test")
    fail("eval_split must be train, val or test");
  if (boundary_tolerance < 0) fail("boundary_tolerance must be >= 0");
  if (descriptor == DescriptorKind::kExternalFile && external_pattern.empty())
    fail("descriptor.path is required for external descriptors");
  if (sw.window < 1 || sw.stride < 1 || sw.stride > sw.window) fail("sw requires 1 <= stride <= window");
  try {
    slic.validate();
    lsc.validate();
    quickshift.validate();
    hswo.validate();
    patches.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

const std::vector<std::string>& ExperimentConfig::split(const std::string& name) const {
  if (name == "train") return tiles.train;
  if (name == "val") return tiles.val;
  if (name == "test") return tiles.test;
  throw StageError("config", "unknown split '" + name + "'");
}

fs::path ExperimentConfig::image_path(const std::string& tile) const {
  return dataset_root / replace_all(image_pattern, "{tile}", tile);
}

fs::path ExperimentConfig::truth_path(const std::string& tile) const {
  return dataset_root / replace_all(truth_pattern, "{tile}", tile);
}

fs::path ExperimentConfig::external_features_path(Algorithm algo, const std::string& tile) const {
  return dataset_root / replace_all(replace_all(external_pattern, "{tile}", tile), "{algo}", algorithm_name(algo));
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw StageError("config", "missing config '" + path.string() + "'");
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw StageError("config", path.string() + ": " + e.what());
  }
  check_keys(root,
             {"dataset_root", "images", "ground_truth", "palette", "unknown_colors_unlabeled", "tiles", "algorithms",
              "slic", "lsc", "quickshift", "sw", "hswo", "patches", "descriptor", "train", "boundary_tolerance",
              "f1_class", "eval_split", "output_dir"},
             "");
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  ExperimentConfig cfg;

  std::string text = ".";
  read(root, "dataset_root", text);
  cfg.dataset_root = resolve(base, text);
  read(root, "images", cfg.image_pattern);
  read(root, "ground_truth", cfg.truth_pattern);
  if (!root["palette"]) throw StageError("config", "'palette' is required");
  cfg.palette_path = resolve(base, scalar<std::string>(root["palette"], "palette"));
  read(root, "unknown_colors_unlabeled", cfg.unknown_colors_unlabeled);

  if (const YAML::Node t = root["tiles"]) {
    check_keys(t, {"train", "val", "test"}, "tiles");
    cfg.tiles.train = read_tiles(t["train"], "tiles.train");
    cfg.tiles.val = read_tiles(t["val"], "tiles.val");
    cfg.tiles.test = read_tiles(t["test"], "tiles.test");
  }

  if (const YAML::Node a = root["algorithms"]) {
    cfg.algorithms.clear();
    for (const auto& name : read_tiles(a, "algorithms")) {
      try {
        cfg.algorithms.push_back(parse_algorithm(name));
      } catch (const std::invalid_argument& e) {
        throw StageError("config", e.what());
      }
    }
  }
  if (const YAML::Node n = root["slic"]) {
    check_keys(n, {"k", "compactness", "max_iters", "min_region_fraction"}, "slic");
    read(n, "k", cfg.slic.k, "slic.");
    read(n, "compactness", cfg.slic.compactness, "slic.");
    read(n, "max_iters", cfg.slic.max_iters, "slic.");
    read(n, "min_region_fraction", cfg.slic.min_region_fraction, "slic.");
  }
  if (const YAML::Node n = root["lsc"]) {
    check_keys(n, {"k", "ratio", "max_iters", "min_region_fraction"}, "lsc");
    read(n, "k", cfg.lsc.k, "lsc.");
    read(n, "ratio", cfg.lsc.ratio, "lsc.");
    read(n, "max_iters", cfg.lsc.max_iters, "lsc.");
    read(n, "min_region_fraction", cfg.lsc.min_region_fraction, "lsc.");
  }
  if (const YAML::Node n = root["quickshift"]) {
    check_keys(n, {"kernel_size", "max_dist", "color_ratio"}, "quickshift");
    read(n, "kernel_size", cfg.quickshift.kernel_size, "quickshift.");
    read(n, "max_dist", cfg.quickshift.max_dist, "quickshift.");
    read(n, "color_ratio", cfg.quickshift.color_ratio, "quickshift.");
  }
  if (const YAML::Node n = root["sw"]) {
    check_keys(n, {"window", "stride"}, "sw");
    read(n, "window", cfg.sw.window, "sw.");
    cfg.sw.stride = cfg.sw.window;
    read(n, "stride", cfg.sw.stride, "sw.");
  }
  if (const YAML::Node n = root["hswo"]) {
    check_keys(n, {"target_regions", "dissimilarity"}, "hswo");
    read(n, "target_regions", cfg.hswo.target_regions, "hswo.");
    std::string d = "ward";
    read(n, "dissimilarity", d, "hswo.");
    if (d == "ward") {
      cfg.hswo.dissimilarity = MergeCriterion::kWard;
    } else if (d == "mean_distance") {
      cfg.hswo.dissimilarity = MergeCriterion::kMeanDistance;
    } else {
      throw StageError("config", "hswo.dissimilarity must be ward or mean_distance");
    }
  }
  if (const YAML::Node n = root["patches"]) {
    check_keys(n, {"scales", "resize_to"}, "patches");
    if (const YAML::Node s = n["scales"]) {
      cfg.patches.scales.clear();
      for (const auto& v : s) cfg.patches.scales.push_back(scalar<int>(v, "patches.scales"));
    }
    read(n, "resize_to", cfg.patches.resize_to, "patches.");
  }
  if (const YAML::Node n = root["descriptor"]) {
    check_keys(n, {"kind", "path"}, "descriptor");
    std::string kind = "builtin";
    read(n, "kind", kind, "descriptor.");
    if (kind == "builtin") {
      cfg.descriptor = DescriptorKind::kBuiltinStats;
    } else if (kind == "external") {
      cfg.descriptor = DescriptorKind::kExternalFile;
    } else {
      throw StageError("config", "descriptor.kind must be builtin or external");
    }
    read(n, "path", cfg.external_pattern, "descriptor.");
  }
  if (const YAML::Node n = root["train"]) {
    check_keys(n, {"lambda", "epochs", "eta0", "seed"}, "train");
    read(n, "lambda", cfg.train.lambda, "train.");
    read(n, "epochs", cfg.train.epochs, "train.");
    read(n, "eta0", cfg.train.eta0, "train.");
    read(n, "seed", cfg.train.seed, "train.");
  }
  read(root, "boundary_tolerance", cfg.boundary_tolerance);
  read(root, "f1_class", cfg.f1_class);
  read(root, "eval_split", cfg.eval_split);
  std::string out = "out";
  read(root, "output_dir", out);
  cfg.output_dir = resolve(base, out);

  cfg.validate();
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.algorithm) cfg.algorithms = {*o.algorithm};
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) cfg.train.seed = *o.seed;
}

Segmentation run_segmentation(const ExperimentConfig& cfg, Algorithm algo, const RasterImage& img) {
  switch (algo) {
    case Algorithm::kSlic: return slic(img, cfg.slic);
    case Algorithm::kLsc: return lsc(img, cfg.lsc);
    case Algorithm::kQuickshift: return quickshift(img, cfg.quickshift);
    case Algorithm::kSlidingWindow: return sliding_window(img.height(), img.width(), cfg.sw.window, cfg.sw.stride);
    case Algorithm::kHswo: return hswo_merge(img, cfg.hswo);
  }
  throw std::invalid_argument("unknown algorithm");
}

std::vector<SegmentLog> cmd_segment(const ExperimentConfig& cfg, const std::string& tile) {
  const std::string stage = "segment";
  const std::vector<std::string> tiles = tile.empty() ? all_tiles(cfg) : std::vector<std::string>{tile};
  if (tiles.empty()) throw StageError(stage, "no tiles to segment");
  for (const auto& t : tiles) require_file(stage, cfg.image_path(t), "image");

  std::vector<SegmentLog> log;
  for (const auto& t : tiles) {
    const RasterImage img = in_stage(stage, t, [&] { return load_image(cfg.image_path(t)); });
    for (Algorithm algo : cfg.algorithms) {
      in_stage(stage, t, [&] {
        const auto start = std::chrono::steady_clock::now();
        const Segmentation seg = run_segmentation(cfg, algo, img);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const fs::path base = segmentation_base(cfg, algo, t);
        fs::create_directories(base.parent_path());
        fs::path png = base, txt = base, hdr = base;
        png += ".png";
        txt += ".txt";
        hdr += ".png.hdr";
        const bool as_png = seg.region_count() <= 65536;
        fs::remove(as_png ? txt : png);
        if (!as_png) fs::remove(hdr);
        save_segmentation(seg, as_png ? png : txt);

        YAML::Emitter e;
        e.SetDoublePrecision(17);
        e << YAML::BeginMap;
        e << YAML::Key << "tile" << YAML::Value << t;
        e << YAML::Key << "image" << YAML::Value << cfg.image_path(t).string();
        e << YAML::Key << "algorithm" << YAML::Value << algorithm_name(algo);
        emit_parameters(e, cfg, algo);
        e << YAML::Key << "region_count" << YAML::Value << seg.region_count();
        e << YAML::Key << "wall_seconds" << YAML::Value << seconds;
        e << YAML::EndMap;
        fs::path manifest = base;
        manifest += ".manifest.yaml";
        write_text_file(manifest, std::string(e.c_str()) + "\n");
        log.push_back({algo, t, seg.region_count(), seconds});
      });
    }
  }
  return log;
}

std::vector<SegMetricsRow> cmd_eval_seg(const ExperimentConfig& cfg) {
  const std::string stage = "eval-seg";
  const auto& tiles = cfg.split(cfg.eval_split);
  if (tiles.empty()) throw StageError(stage, "split '" + cfg.eval_split + "' has no tiles");
  const Palette palette = load_config_palette(cfg, stage);

  std::vector<LabelMap> truths;
  for (const auto& t : tiles) truths.push_back(load_truth(cfg, palette, t, stage));

  std::vector<SegMetricsRow> rows;
  for (Algorithm algo : cfg.algorithms) {
    SegMetricsReport sum;
    double weight = 0.0, regions = 0.0;
    double ue = 0.0, br = 0.0, ap = 0.0, oracle = 0.0;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      const Segmentation seg = load_tile_segmentation(cfg, algo, tiles[i], stage);
      require_same_shape(stage, tiles[i], seg.height(), seg.width(), truths[i].height(), truths[i].width());
      const auto m = in_stage(stage, tiles[i], [&] {
        return evaluate_segmentation(seg, truths[i], cfg.boundary_tolerance);
      });
      const auto w = static_cast<double>(labeled_pixel_count(truths[i]));
      ue += w * m.ue;
      br += w * m.br;
      ap += w * m.ap;
      oracle += w * m.oracle;
      weight += w;
      regions += m.region_count;
    }
    if (weight <= 0.0) throw StageError(stage, "no labeled ground-truth pixels in split '" + cfg.eval_split + "'");
    sum.region_count = static_cast<int>(std::lround(regions / static_cast<double>(tiles.size())));
    sum.ue = ue / weight;
    sum.br = br / weight;
    sum.ap = ap / weight;
    sum.oracle = oracle / weight;
    rows.push_back({algorithm_name(algo), sum});
  }
  std::ostringstream csv;
  write_seg_metrics_csv(csv, rows);
  in_stage(stage, "", [&] { write_text_file(cfg.output_dir / "segmentation_metrics.csv", csv.str()); });
  return rows;
}

void cmd_features(const ExperimentConfig& cfg) {
  const std::string stage = "features";
  std::vector<std::string> tiles = cfg.tiles.train;
  tiles.insert(tiles.end(), cfg.tiles.test.begin(), cfg.tiles.test.end());
  if (tiles.empty()) throw StageError(stage, "no train or test tiles");
  for (const auto& t : tiles) require_file(stage, cfg.image_path(t), "image");
  for (const auto& t : tiles) {
    const RasterImage img = in_stage(stage, t, [&] { return load_image(cfg.image_path(t)); });
    for (Algorithm algo : cfg.algorithms) {
      const Segmentation seg = load_tile_segmentation(cfg, algo, t, stage);
      require_same_shape(stage, t, seg.height(), seg.width(), img.height(), img.width());
      Descriptor d;
      d.kind = cfg.descriptor;
      if (d.kind == DescriptorKind::kExternalFile) {
        d.external_path = cfg.external_features_path(algo, t);
        require_file(stage, d.external_path, "external features");
      }
      in_stage(stage, t, [&] {
        const FeatureSet feats = build_samples(img, seg, cfg.patches, d);
        const fs::path out = features_file(cfg, algo, t);
        fs::create_directories(out.parent_path());
        save_features(feats, out);
      });
    }
  }
}

namespace {

FeatureSet load_tile_features(const ExperimentConfig& cfg, Algorithm algo, const std::string& tile,
                              int region_count, const std::string& stage) {
  const fs::path path = features_file(cfg, algo, tile);
  require_file(stage, path, "features");
  return in_stage(stage, tile, [&] { return features_for_regions(load_external_features(path), region_count); });
}

}  // namespace

void cmd_train(const ExperimentConfig& cfg) {
  const std::string stage = "train";
  if (cfg.tiles.train.empty()) throw StageError(stage, "no train tiles");
  const Palette palette = load_config_palette(cfg, stage);
  for (Algorithm algo : cfg.algorithms) {
    std::vector<double> values;
    std::vector<ClassId> labels;
    int dim = -1;
    for (const auto& t : cfg.tiles.train) {
      const Segmentation seg = load_tile_segmentation(cfg, algo, t, stage);
      const LabelMap gt = load_truth(cfg, palette, t, stage);
      require_same_shape(stage, t, seg.height(), seg.width(), gt.height(), gt.width());
      const FeatureSet feats = load_tile_features(cfg, algo, t, seg.region_count(), stage);
      if (dim >= 0 && feats.dim() != dim)
        throw StageError(stage, "tile " + t + ": feature dimension " + std::to_string(feats.dim()) + " differs from " +
                                    std::to_string(dim));
      dim = feats.dim();
      const auto majority = majority_label(seg, gt);
      for (int r = 0; r < feats.rows(); ++r) {
        const ClassId y = majority[static_cast<std::size_t>(r)];
        if (y == kUnlabeled) continue;
        labels.push_back(y);
        const auto row = feats.row(r);
        values.insert(values.end(), row.begin(), row.end());
      }
    }
    in_stage(stage, "", [&] {
      const FeatureSet samples(static_cast<int>(labels.size()), dim, std::move(values));
      const LinearModel model = train_svm(samples, labels, cfg.train, palette.size());
      const fs::path out = model_file(cfg, algo);
      fs::create_directories(out.parent_path());
      save_model(model, out);
    });
  }
}

void cmd_predict(const ExperimentConfig& cfg) {
  const std::string stage = "predict";
  if (cfg.tiles.test.empty()) throw StageError(stage, "no test tiles");
  const Palette palette = load_config_palette(cfg, stage);
  for (Algorithm algo : cfg.algorithms) {
    const fs::path mpath = model_file(cfg, algo);
    require_file(stage, mpath, "model");
    const LinearModel model = in_stage(stage, "", [&] { return load_model(mpath); });
    if (model.num_classes() > palette.size())
      throw StageError(stage, "model has more classes than the palette");
    for (const auto& t : cfg.tiles.test) {
      const Segmentation seg = load_tile_segmentation(cfg, algo, t, stage);
      const FeatureSet feats = load_tile_features(cfg, algo, t, seg.region_count(), stage);
      in_stage(stage, t, [&] {
        const auto labels = predict_all(model, feats);
        const LabelMap map = build_semantic_map(seg, labels);
        const fs::path out = map_file(cfg, algo, t);
        fs::create_directories(out.parent_path());
        save_labels(map, palette, out);
      });
    }
  }
}

std::vector<ClassifRow> cmd_eval_classif(const ExperimentConfig& cfg) {
  const std::string stage = "eval";
  if (cfg.tiles.test.empty()) throw StageError(stage, "no test tiles");
  const Palette palette = load_config_palette(cfg, stage);
  std::optional<ClassId> f1_id;
  if (!cfg.f1_class.empty()) {
    const ClassId id = palette.find(cfg.f1_class);
    if (id == kUnlabeled) throw StageError(stage, "f1_class '" + cfg.f1_class + "' is not in the palette");
    f1_id = id;
  }
  std::vector<LabelMap> truths;
  for (const auto& t : cfg.tiles.test) truths.push_back(load_truth(cfg, palette, t, stage));

  std::vector<ClassifRow> rows;
  for (Algorithm algo : cfg.algorithms) {
    ConfusionMatrix pooled(palette.size());
    double regions = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      const std::string& t = cfg.tiles.test[i];
      const fs::path mpath = map_file(cfg, algo, t);
      require_file(stage, mpath, "semantic map");
      const LabelMap pred = in_stage(stage, t, [&] { return load_labels(mpath, palette, false); });
      require_same_shape(stage, t, pred.height(), pred.width(), truths[i].height(), truths[i].width());
      pooled += in_stage(stage, t, [&] { return confusion(pred, truths[i], palette.size()); });
      regions += load_tile_segmentation(cfg, algo, t, stage).region_count();
    }
    if (pooled.total() == 0) throw StageError(stage, "no labeled ground-truth pixels in the test tiles");
    ClassifRow row;
    row.algorithm = algorithm_name(algo);
    row.regions = static_cast<int>(std::lround(regions / static_cast<double>(truths.size())));
    row.accuracy = overall_accuracy(pooled);
    row.kappa = cohen_kappa(pooled);
    if (f1_id) row.f1_car = f1_score(pooled, *f1_id);
    rows.push_back(row);
  }
  std::ostringstream csv;
  write_classif_csv(csv, rows);
  in_stage(stage, "", [&] { write_text_file(cfg.output_dir / "classification_metrics.csv", csv.str()); });
  return rows;
}

PipelineReport cmd_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  load_config_palette(cfg, "config");
  for (const auto& t : all_tiles(cfg)) {
    require_file("config", cfg.image_path(t), "image");
    require_file("config", cfg.truth_path(t), "ground truth");
  }
  PipelineReport report;
  cmd_segment(cfg);
  report.segmentation = cmd_eval_seg(cfg);
  cmd_features(cfg);
  cmd_train(cfg);
  cmd_predict(cfg);
  report.classification = cmd_eval_classif(cfg);
  return report;
}

void cmd_render(const RenderRequest& req) {
  const std::string stage = "render";
  if (req.labels.empty() == req.segmentation.empty())
    throw StageError(stage, "give exactly one of a label image or a segmentation");
  if (req.output.empty()) throw StageError(stage, "no output path");
  require_file(stage, req.palette, "palette");
  in_stage(stage, "", [&] {
    const Palette palette = load_palette(req.palette);
    RasterImage img;
    if (!req.labels.empty()) {
      require_file(stage, req.labels, "label image");
      img = render_labels(load_labels(req.labels, palette, false), palette);
    } else {
      require_file(stage, req.segmentation, "segmentation");
      img = render_labels(load_segmentation(req.segmentation).ids(), palette);
    }
    if (!req.boundaries.empty()) {
      require_file(stage, req.boundaries, "boundary segmentation");
      const Segmentation seg = load_segmentation(req.boundaries);
      require_same_shape(stage, "", seg.height(), seg.width(), img.height(), img.width());
      overlay_boundaries(img, extract_boundaries(seg), req.boundary_color);
    }
    if (req.output.has_parent_path()) fs::create_directories(req.output.parent_path());
    save_png(img, req.output);
  });
}

fs::path cmd_synth(const SynthRequest& req) {
  const std::string stage = "synth";
  if (req.train_tiles < 1 || req.test_tiles < 1) throw StageError(stage, "need at least one train and one test tile");
  return in_stage(stage, "", [&] {
    const Palette palette = synth_palette();
    fs::create_directories(req.output_dir / "images");
    fs::create_directories(req.output_dir / "gt");
    save_palette(palette, req.output_dir / "palette.txt");

    std::vector<std::string> train, test;
    const int total = req.train_tiles + req.test_tiles;
    for (int i = 0; i < total; ++i) {
      const std::string name = i < req.train_tiles ? "train" + std::to_string(i + 1)
                                                   : "test" + std::to_string(i - req.train_tiles + 1);
      (i < req.train_tiles ? train : test).push_back(name);
      SynthParams p = req.scene;
      p.seed = req.scene.seed + static_cast<std::uint64_t>(i);
      const SynthScene scene = synthesize_scene(p);
      save_png(scene.image, req.output_dir / "images" / (name + ".png"));
      save_labels(scene.truth, palette, req.output_dir / "gt" / (name + ".png"));
    }

    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "dataset_root" << YAML::Value << ".";
    e << YAML::Key << "images" << YAML::Value << "images/{tile}.png";
    e << YAML::Key << "ground_truth" << YAML::Value << "gt/{tile}.png";
    e << YAML::Key << "palette" << YAML::Value << "palette.txt";
    e << YAML::Key << "tiles" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "train" << YAML::Value << YAML::Flow << train;
    e << YAML::Key << "test" << YAML::Value << YAML::Flow << test;
    e << YAML::EndMap;
    e << YAML::Key << "algorithms" << YAML::Value << YAML::Flow << std::vector<std::string>{"slic"};
    e << YAML::Key << "slic" << YAML::Value << YAML::BeginMap << YAML::Key << "k" << YAML::Value << 400
      << YAML::EndMap;
    e << YAML::Key << "descriptor" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << "builtin" << YAML::EndMap;
    e << YAML::Key << "f1_class" << YAML::Value << "car";
    e << YAML::Key << "output_dir" << YAML::Value << "out";
    e << YAML::EndMap;
    const fs::path config = req.output_dir / "config.yaml";
    write_text_file(config, std::string(e.c_str()) + "\n");
    return config;
  });
}

}  // namespace segclass
