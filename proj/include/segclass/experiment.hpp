#pragma once

// Config-driven experiment runner. Every command reads an ExperimentConfig,
// works tile by tile and writes its outputs under the configured output
// directory:
//
//   segmentations/<algo>/<tile>.png (+ .hdr, .manifest.yaml)
//   features/<algo>/<tile>.txt
//   models/<algo>.model
//   maps/<algo>/<tile>.png
//   segmentation_metrics.csv
//   classification_metrics.csv

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "segclass/classify.hpp"
#include "segclass/claseval.hpp"
#include "segclass/features.hpp"
#include "segclass/raster.hpp"
#include "segclass/segeval.hpp"
#include "segclass/superpixels.hpp"
#include "segclass/synth.hpp"

namespace segclass {

/// Error carrying the pipeline stage, e.g. "[segment] tile 3: ...".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

enum class Algorithm { kSlic, kLsc, kQuickshift, kSlidingWindow, kHswo };

/// Names used by configs and the CLI: slic, lsc, quickshift, sw, hswo.
const char* algorithm_name(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

struct SlidingWindowParams {
  int window = 16;
  int stride = 16;
};

struct TileSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct ExperimentConfig {
  std::filesystem::path dataset_root;
  std::string image_pattern = "images/{tile}.png";      // relative to dataset_root
  std::string truth_pattern = "gt/{tile}.png";
  std::filesystem::path palette_path;
  bool unknown_colors_unlabeled = false;
  TileSplit tiles;

  std::vector<Algorithm> algorithms{Algorithm::kSlic};
  SlicParams slic;
  LscParams lsc;
  QuickshiftParams quickshift;
  SlidingWindowParams sw;
  MergeParams hswo;

  PatchSpec patches;
  DescriptorKind descriptor = DescriptorKind::kBuiltinStats;
  std::string external_pattern;  // {algo} and {tile} placeholders, relative to dataset_root
  TrainConfig train;

  int boundary_tolerance = 3;
  std::string f1_class = "car";
  std::string eval_split = "test";  // train, val or test
  std::filesystem::path output_dir = "out";

  /// Checks value ranges and split disjointness; throws StageError("config").
  void validate() const;
  const std::vector<std::string>& split(const std::string& name) const;
  std::filesystem::path image_path(const std::string& tile) const;
  std::filesystem::path truth_path(const std::string& tile) const;
  std::filesystem::path external_features_path(Algorithm algo, const std::string& tile) const;
};

/// Parses a YAML config. Relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Command-line overrides applied after loading.
struct Overrides {
  std::optional<Algorithm> algorithm;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

/// Runs one segmentation algorithm with the config's parameters.
Segmentation run_segmentation(const ExperimentConfig& cfg, Algorithm algo, const RasterImage& img);

struct SegmentLog {
  Algorithm algorithm;
  std::string tile;
  int region_count;
  double seconds;
};

/// Segments `tile` or, when empty, every tile of every split.
std::vector<SegmentLog> cmd_segment(const ExperimentConfig& cfg, const std::string& tile = {});

/// Pixel-weighted metrics over the eval split; writes segmentation_metrics.csv.
std::vector<SegMetricsRow> cmd_eval_seg(const ExperimentConfig& cfg);

/// Region samples for every train and test tile.
void cmd_features(const ExperimentConfig& cfg);

/// Trains one model per algorithm on majority-vote region labels of the train tiles.
void cmd_train(const ExperimentConfig& cfg);

/// Writes semantic maps of the test tiles.
void cmd_predict(const ExperimentConfig& cfg);

/// Pooled confusion over the test tiles; writes classification_metrics.csv.
std::vector<ClassifRow> cmd_eval_classif(const ExperimentConfig& cfg);

struct PipelineReport {
  std::vector<SegMetricsRow> segmentation;
  std::vector<ClassifRow> classification;
};
PipelineReport cmd_pipeline(const ExperimentConfig& cfg);

struct RenderRequest {
  std::filesystem::path labels;        // palette-coded label image
  std::filesystem::path segmentation;  // or a segmentation painted by id
  std::filesystem::path palette;
  std::filesystem::path output;
  std::filesystem::path boundaries;    // optional segmentation to overdraw
  Rgb boundary_color{0, 0, 0};
};
void cmd_render(const RenderRequest& req);

struct SynthRequest {
  std::filesystem::path output_dir;
  SynthParams scene;
  int train_tiles = 3;
  int test_tiles = 1;
};
/// Writes images/, gt/, palette.txt and a ready-to-run config.yaml.
std::filesystem::path cmd_synth(const SynthRequest& req);

}  // namespace segclass
