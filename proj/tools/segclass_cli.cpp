// segclass: segment, describe, classify and evaluate orthoimage tiles.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "segclass/experiment.hpp"
#include "segclass/image_io.hpp"

namespace {

using namespace segclass;

struct CommonFlags {
  std::string config;
  std::string algo;
  std::string out;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (YAML)")->required();
  cmd->add_option("--algo", f.algo, "Run only this algorithm")
      ->check(CLI::IsMember({"slic", "lsc", "quickshift", "sw", "hswo"}));
  cmd->add_option("--out", f.out, "Override the output directory");
  cmd->add_option("--seed", f.seed, "Override the training seed")->check(CLI::NonNegativeNumber);
}

ExperimentConfig load(const CommonFlags& f) {
  ExperimentConfig cfg = load_config(f.config);
  Overrides o;
  if (!f.algo.empty()) o.algorithm = parse_algorithm(f.algo);
  if (!f.out.empty()) o.output_dir = f.out;
  if (f.seed >= 0) o.seed = static_cast<std::uint64_t>(f.seed);
  apply_overrides(cfg, o);
  cfg.validate();
  return cfg;
}

Rgb parse_rgb(const std::string& text) {
  unsigned r = 0, g = 0, b = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%u,%u,%u%c", &r, &g, &b, &tail) != 3 || r > 255 || g > 255 || b > 255)
    throw StageError("render", "boundary color must be r,g,b with values 0-255, got '" + text + "'");
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixel-based semantic classification of orthoimages"};
  app.require_subcommand(1);

  CommonFlags segment_f, evalseg_f, features_f, train_f, predict_f, evalcls_f, pipeline_f;
  std::string tile;
  auto* segment = app.add_subcommand("segment", "Segment tiles and write manifests");
  add_common(segment, segment_f);
  segment->add_option("--tile", tile, "Segment only this tile");
  auto* eval_seg = app.add_subcommand("eval-seg", "Segmentation metrics CSV");
  add_common(eval_seg, evalseg_f);
  auto* features = app.add_subcommand("features", "Region samples for train and test tiles");
  add_common(features, features_f);
  auto* train = app.add_subcommand("train", "Train one linear SVM per algorithm");
  add_common(train, train_f);
  auto* predict = app.add_subcommand("predict", "Semantic maps of the test tiles");
  add_common(predict, predict_f);
  auto* eval_classif = app.add_subcommand("eval-classif", "Classification metrics CSV");
  add_common(eval_classif, evalcls_f);
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  add_common(pipeline, pipeline_f);

  RenderRequest render_req;
  std::string render_config, boundary_color = "0,0,0";
  auto* render = app.add_subcommand("render", "Paint a label map or segmentation with palette colors");
  auto* labels_opt = render->add_option("--labels", render_req.labels, "Palette-coded label image");
  auto* seg_opt = render->add_option("--segmentation", render_req.segmentation, "Segmentation painted by id");
  labels_opt->excludes(seg_opt);
  render->add_option("--palette", render_req.palette, "Palette file");
  render->add_option("--config", render_config, "Take the palette from this config");
  render->add_option("--out", render_req.output, "Output PNG")->required();
  render->add_option("--boundaries", render_req.boundaries, "Segmentation whose boundaries are overdrawn");
  render->add_option("--boundary-color", boundary_color, "Overlay color r,g,b");

  SynthRequest synth_req;
  std::uint64_t synth_seed = 1;
  int size = 256;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset and config");
  synth->add_option("--out", synth_req.output_dir, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Scene seed");
  synth->add_option("--size", size, "Tile side in pixels")->check(CLI::Range(16, 8192));
  synth->add_option("--shapes", synth_req.scene.shapes, "Shapes per tile")->check(CLI::NonNegativeNumber);
  synth->add_option("--noise", synth_req.scene.noise, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
  synth->add_option("--train-tiles", synth_req.train_tiles, "Training tiles")->check(CLI::PositiveNumber);
  synth->add_option("--test-tiles", synth_req.test_tiles, "Test tiles")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (segment->parsed()) {
      for (const auto& entry : cmd_segment(load(segment_f), tile)) {
        std::printf("%s tile %s: %d regions (%.3f s)\n", algorithm_name(entry.algorithm), entry.tile.c_str(),
                    entry.region_count, entry.seconds);
      }
    } else if (eval_seg->parsed()) {
      write_seg_metrics_csv(std::cout, cmd_eval_seg(load(evalseg_f)));
    } else if (features->parsed()) {
      cmd_features(load(features_f));
    } else if (train->parsed()) {
      cmd_train(load(train_f));
    } else if (predict->parsed()) {
      cmd_predict(load(predict_f));
    } else if (eval_classif->parsed()) {
      write_classif_csv(std::cout, cmd_eval_classif(load(evalcls_f)));
    } else if (pipeline->parsed()) {
      const PipelineReport report = cmd_pipeline(load(pipeline_f));
      write_seg_metrics_csv(std::cout, report.segmentation);
      std::cout << '\n';
      write_classif_csv(std::cout, report.classification);
    } else if (render->parsed()) {
      if (render_req.palette.empty()) {
        if (render_config.empty()) throw StageError("render", "give --palette or --config");
        render_req.palette = load_config(render_config).palette_path;
      }
      render_req.boundary_color = parse_rgb(boundary_color);
      cmd_render(render_req);
    } else if (synth->parsed()) {
      synth_req.scene.height = size;
      synth_req.scene.width = size;
      synth_req.scene.seed = synth_seed;
      std::cout << cmd_synth(synth_req).string() << '\n';
    }
  } catch (const StageError& e) {
    std::cerr << "segclass: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "segclass: [cli] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
