// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "merge_oracle.hpp"
#include "oracles.hpp"
#include "segclass/claseval.hpp"
#include "segclass/classify.hpp"
#include "segclass/experiment.hpp"
#include "segclass/features.hpp"
#include "segclass/image_io.hpp"
#include "segclass/segeval.hpp"
#include "segclass/superpixels.hpp"
#include "support.hpp"

using namespace segtest;
namespace fs = std::filesystem;

namespace {

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void near(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol, what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
  }
  void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    if (ok()) return info_;
    return std::to_string(failures_) + " failure(s): " + notes_ + (info_.empty() ? "" : " [" + info_ + "]");
  }

 private:
  int failures_ = 0;
  std::string notes_, info_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RasterImage noise_image(int h, int w, int channels, std::uint32_t seed) {
  std::mt19937 rng(seed);
  RasterImage img(h, w, channels);
  for (float& v : img.data()) v = static_cast<float>(rng() % 256) / 255.0f;
  return img;
}

ConfusionMatrix matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  ConfusionMatrix cm(static_cast<int>(rows.size()));
  ClassId t = 0;
  for (const auto& row : rows) {
    ClassId p = 0;
    for (std::int64_t n : row) cm.add(t, p++, n);
    ++t;
  }
  return cm;
}

bool contiguous_total_partition(const Segmentation& seg, int h, int w) {
  if (seg.height() != h || seg.width() != w || seg.region_count() < 1) return false;
  std::vector<bool> used(static_cast<std::size_t>(seg.region_count()), false);
  for (RegionId id : seg.ids().cells()) {
    if (id < 0 || id >= seg.region_count()) return false;
    used[static_cast<std::size_t>(id)] = true;
  }
  for (bool u : used) {
    if (!u) return false;
  }
  return true;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

void ac1(Check& c) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 5);
    const std::string tag = "fixture " + std::to_string(trial);
    c.near(undersegmentation_error(f.seg, f.gt), oracle::undersegmentation_error(f.seg, f.gt), 1e-12, tag + " UE");
    c.near(average_purity(f.seg, f.gt), oracle::average_purity(f.seg, f.gt), 1e-12, tag + " AP");
    c.near(oracle_accuracy(f.seg, f.gt), oracle::oracle_accuracy(f.seg, f.gt), 1e-12, tag + " oracle");
    for (int tol : {0, 1, 3}) {
      c.near(boundary_recall(f.seg, f.gt, tol), oracle::boundary_recall(f.seg, f.gt, tol), 1e-12, tag + " BR");
    }

    std::uniform_int_distribution<ClassId> cls(0, f.classes - 1);
    std::vector<ClassId> region_labels(static_cast<std::size_t>(f.seg.region_count()));
    for (ClassId& v : region_labels) v = cls(rng);
    const LabelMap pred = build_semantic_map(f.seg, region_labels);
    const ConfusionMatrix cm = confusion(pred, f.gt, f.classes);
    c.near(overall_accuracy(cm), oracle::accuracy(pred, f.gt), 1e-12, tag + " accuracy");
    c.near(cohen_kappa(cm), oracle::kappa(pred, f.gt, f.classes), 1e-12, tag + " kappa");
    for (ClassId k = 0; k < f.classes; ++k) {
      const auto got = f1_score(cm, k);
      const auto want = oracle::f1(pred, f.gt, k);
      c.expect(got.has_value() == want.has_value(), tag + " F1 definedness");
      if (got && want) c.near(*got, *want, 1e-12, tag + " F1");
    }
  }
  c.note("1000 fixtures");
}

void ac2(Check& c) {
  const LabelMap gt = four_by_four_truth();
  const Segmentation seg = four_by_four_segmentation();
  c.near(undersegmentation_error(seg, gt), 0.5, 0.0, "UE");
  c.near(average_purity(seg, gt), 5.0 / 6.0, 1e-15, "AP");
  c.near(oracle_accuracy(seg, gt), 0.75, 0.0, "oracle");
  c.near(boundary_recall(seg, gt, 0), 0.5, 0.0, "BR tol 0");
  c.near(boundary_recall(seg, gt, 3), 1.0, 0.0, "BR tol 3");
  c.near(cohen_kappa(matrix({{2, 1}, {1, 2}})), 1.0 / 3.0, 1e-15, "kappa");
  const auto f1 = f1_score(matrix({{5, 1}, {1, 2}}), 1);
  c.expect(f1.has_value(), "F1 defined");
  if (f1) c.near(*f1, 2.0 / 3.0, 1e-15, "F1");
}

void ac3(Check& c) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 1, trial % 2 ? 0.15 : 0.0);
    const Segmentation seg = connected_components(f.gt);
    const std::string tag = "fixture " + std::to_string(trial);
    c.near(undersegmentation_error(seg, f.gt), 0.0, 0.0, tag + " UE");
    c.near(boundary_recall(seg, f.gt, 0), 1.0, 0.0, tag + " BR");
    c.near(average_purity(seg, f.gt), 1.0, 0.0, tag + " AP");
    c.near(oracle_accuracy(seg, f.gt), 1.0, 0.0, tag + " oracle");
    const LabelMap painted = build_semantic_map(seg, majority_label(seg, f.gt));
    bool same = true;
    for (std::size_t i = 0; i < painted.size(); ++i) same = same && (f.gt[i] == kUnlabeled || painted[i] == f.gt[i]);
    c.expect(same, tag + " painted map differs from gt");
    const ConfusionMatrix cm = confusion(painted, f.gt, f.classes);
    c.near(overall_accuracy(cm), 1.0, 0.0, tag + " accuracy");
    c.near(cohen_kappa(cm), 1.0, 0.0, tag + " kappa");
  }
  c.note("500 fixtures");
}

void ac4(Check& c) {
  const RasterImage noise = noise_image(64, 64, 3, 64);
  const std::vector<std::pair<std::string, std::function<Segmentation()>>> runs = {
      {"slic", [&] { return slic(noise, {.k = 64}); }},
      {"lsc", [&] { return lsc(noise, {.k = 64}); }},
      {"quickshift", [&] { return quickshift(noise, {.kernel_size = 2.0, .max_dist = 6.0}); }},
      {"sw", [&] { return sliding_window(64, 64, 8, 8); }},
      {"sw-overlap", [&] { return sliding_window(64, 64, 16, 8); }},
      {"hswo", [&] { return hswo_merge(noise, {.target_regions = 64}); }},
  };
  for (const auto& [name, run] : runs) c.expect(contiguous_total_partition(run(), 64, 64), name + " partition");

  for (int k : {16, 64, 100, 256}) {
    const RasterImage uniform(64, 64, 3, 0.4f);
    const int ns = slic(uniform, {.k = k}).region_count();
    const int nl = lsc(uniform, {.k = k}).region_count();
    c.expect(ns >= 0.8 * k && ns <= 1.2 * k, "slic k=" + std::to_string(k) + " gave " + std::to_string(ns));
    c.expect(nl >= 0.8 * k && nl <= 1.2 * k, "lsc k=" + std::to_string(k) + " gave " + std::to_string(nl));
  }

  std::int64_t previous = std::numeric_limits<std::int64_t>::max();
  std::string lengths;
  for (int m : {1, 10, 40}) {
    const Segmentation seg = slic(noise, {.k = 64, .compactness = static_cast<double>(m)});
    const std::int64_t length = boundary_length(seg);
    lengths += (lengths.empty() ? "" : ", ") + std::string("m=") + std::to_string(m) + ": " + std::to_string(length) +
               " (" + std::to_string(seg.region_count()) + " regions)";
    c.expect(length <= previous, "slic perimeter rose at m=" + std::to_string(m));
    previous = length;
  }
  c.note("slic perimeters " + lengths);

  const QuickshiftForest forest = quickshift_forest(noise, {.kernel_size = 2.0, .max_dist = 6.0});
  bool uphill = true;
  for (std::size_t i = 0; i < forest.parent.size(); ++i) {
    const auto up = static_cast<std::size_t>(forest.parent[i]);
    uphill = uphill && forest.density[up] >= forest.density[i] && forest.segmentation[up] == forest.segmentation[i];
  }
  c.expect(uphill, "quickshift parent below its child");

  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    for (MergeCriterion crit : {MergeCriterion::kWard, MergeCriterion::kMeanDistance}) {
      const RasterImage img = noise_image(8, 8, 3, seed);
      const MergeParams p{.target_regions = 1, .dissimilarity = crit};
      const auto got = hswo_merge_traced(img, p).trace;
      const auto want = oracle::hswo_trace(img, p);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].first == want[i].first && got[i].second == want[i].second &&
               std::abs(got[i].cost - want[i].cost) <= 1e-12 * std::max(1.0, want[i].cost);
      }
      c.expect(same, "hswo trace differs for seed " + std::to_string(seed));
    }
  }
}

void ac5(Check& c) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 6);
    const double best = oracle_accuracy(f.seg, f.gt);
    std::uniform_int_distribution<ClassId> cls(0, f.classes - 1);
    for (int draw = 0; draw < 100; ++draw) {
      std::vector<ClassId> region_labels(static_cast<std::size_t>(f.seg.region_count()));
      for (ClassId& v : region_labels) v = cls(rng);
      const double acc = overall_accuracy(confusion(build_semantic_map(f.seg, region_labels), f.gt, f.classes));
      c.expect(acc <= best + 1e-12, "labeling beats oracle on fixture " + std::to_string(trial));
    }
    std::vector<ClassId> majority = majority_label(f.seg, f.gt);
    for (ClassId& v : majority) v = v == kUnlabeled ? 0 : v;
    c.near(overall_accuracy(confusion(build_semantic_map(f.seg, majority), f.gt, f.classes)), best, 1e-12,
           "majority labeling on fixture " + std::to_string(trial));
  }
  c.note("100 fixtures x 100 labelings");
}

void ac6(Check& c) {
  ScratchDir dir;
  SynthRequest req{dir.path(), {}, 3, 1};
  req.scene.seed = 1;
  const fs::path config = cmd_synth(req);
  int min_shapes = std::numeric_limits<int>::max();
  for (int i = 0; i < 4; ++i) {
    SynthParams p = req.scene;
    p.seed = req.scene.seed + static_cast<std::uint64_t>(i);
    min_shapes = std::min(min_shapes, synthesize_scene(p).shapes);
  }
  c.expect(min_shapes >= 12, "only " + std::to_string(min_shapes) + " shapes placed");

  const ExperimentConfig cfg = load_config(config);
  c.expect(cfg.algorithms == std::vector<Algorithm>{Algorithm::kSlic} && cfg.slic.k == 400 &&
               cfg.descriptor == DescriptorKind::kBuiltinStats,
           "generated config is not SLIC k=400 with the builtin descriptor");
  const PipelineReport report = cmd_pipeline(cfg);
  const double acc = report.classification.at(0).accuracy;
  const double orc = report.segmentation.at(0).report.oracle;
  c.expect(acc >= 0.95, "accuracy " + std::to_string(acc));
  c.expect(orc >= 0.99, "oracle " + std::to_string(orc));
  c.note("accuracy " + std::to_string(acc) + ", oracle " + std::to_string(orc) + ", shapes >= " +
         std::to_string(min_shapes));

  const std::string seg_csv = slurp(cfg.output_dir / "segmentation_metrics.csv");
  const std::string cls_csv = slurp(cfg.output_dir / "classification_metrics.csv");
  const std::string map = slurp(cfg.output_dir / "maps/slic/test1.png");
  cmd_pipeline(cfg);
  c.expect(!cls_csv.empty() && slurp(cfg.output_dir / "classification_metrics.csv") == cls_csv,
           "classification CSV changed on rerun");
  c.expect(slurp(cfg.output_dir / "segmentation_metrics.csv") == seg_csv, "segmentation CSV changed on rerun");
  c.expect(slurp(cfg.output_dir / "maps/slic/test1.png") == map, "semantic map changed on rerun");
}

void ac7(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<double> values;
  std::vector<ClassId> labels;
  for (int i = 0; i < 40; ++i) {
    const ClassId cls = i % 2;
    values.push_back((cls == 0 ? -1.0 : 1.0) + jitter(rng));
    values.push_back(jitter(rng));
    labels.push_back(cls);
  }
  const FeatureSet samples(40, 2, values);
  const TrainConfig config;
  const TrainResult r = train_svm_traced(samples, labels, config);
  c.expect(config.epochs <= 20, "more than 20 epochs");
  const auto pred = predict_all(r.model, samples);
  int right = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) right += pred[i] == labels[i];
  c.expect(right == 40, "training accuracy " + std::to_string(right) + "/40");
  for (std::size_t e = 1; e < r.epoch_objective.size(); ++e) {
    c.expect(r.epoch_objective[e] <= r.epoch_objective[e - 1] + 1e-6,
             "objective rose at epoch " + std::to_string(e) + ": " + std::to_string(r.epoch_objective[e - 1]) +
                 " -> " + std::to_string(r.epoch_objective[e]));
  }
  c.note("final objective " + std::to_string(r.epoch_objective.back()));
}

void ac8(Check& c) {
  ScratchDir dir;
  SynthRequest req{dir.path(), {}, 2, 1};
  req.scene.height = req.scene.width = 128;
  req.scene.shapes = 8;
  req.scene.seed = 8;
  ExperimentConfig cfg = load_config(cmd_synth(req));
  cfg.algorithms = {Algorithm::kSlic, Algorithm::kLsc, Algorithm::kQuickshift, Algorithm::kSlidingWindow,
                    Algorithm::kHswo};
  cfg.slic.k = 200;
  cfg.lsc.k = 200;
  cfg.sw = {16, 16};
  cfg.hswo.target_regions = 200;
  cfg.descriptor = DescriptorKind::kExternalFile;
  cfg.external_pattern = "external/{algo}/{tile}.txt";

  // Stand-in for CNN features computed outside: builtin statistics padded
  // with seeded noise, written in the external file format.
  cmd_segment(cfg);
  std::mt19937_64 rng(88);
  std::normal_distribution<double> pad(0.0, 0.01);
  for (Algorithm algo : cfg.algorithms) {
    for (const auto& tile : {"train1", "train2", "test1"}) {
      const Segmentation seg =
          load_segmentation(cfg.output_dir / "segmentations" / algorithm_name(algo) / (std::string(tile) + ".png"));
      const FeatureSet base = build_samples(load_image(cfg.image_path(tile)), seg, {}, {});
      const int dim = base.dim() + 32;
      FeatureSet ext(base.rows(), dim);
      for (int r = 0; r < base.rows(); ++r) {
        auto row = ext.row(r);
        const auto src = base.row(r);
        for (int k = 0; k < dim; ++k) row[k] = k < base.dim() ? src[k] : pad(rng);
      }
      const fs::path out = cfg.external_features_path(algo, tile);
      fs::create_directories(out.parent_path());
      save_features(ext, out);
    }
  }
  cmd_pipeline(cfg);

  const auto seg_rows = parse_csv(slurp(cfg.output_dir / "segmentation_metrics.csv"));
  const auto cls_rows = parse_csv(slurp(cfg.output_dir / "classification_metrics.csv"));
  c.expect(!seg_rows.empty() && seg_rows[0] == std::vector<std::string>{"algorithm", "regions", "ue_pct", "br_pct",
                                                                          "ap_pct", "oracle_pct"},
           "segmentation CSV header");
  c.expect(!cls_rows.empty() && cls_rows[0] == std::vector<std::string>{"algorithm", "regions", "acc_pct", "f1_car",
                                                                          "kappa"},
           "classification CSV header");
  c.expect(seg_rows.size() == cfg.algorithms.size() + 1, "segmentation CSV row count");
  c.expect(cls_rows.size() == cfg.algorithms.size() + 1, "classification CSV row count");
  auto in_unit = [](const std::string& s, double scale) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end) / scale;
    return end != s.c_str() && *end == '\0' && v >= 0.0 && v <= 1.0;
  };
  for (std::size_t i = 1; i < seg_rows.size() && i <= cfg.algorithms.size(); ++i) {
    const auto& row = seg_rows[i];
    c.expect(row.size() == 6 && row[0] == algorithm_name(cfg.algorithms[i - 1]), "segmentation row " + row[0]);
    for (std::size_t k = 2; k < row.size(); ++k) c.expect(in_unit(row[k], 100.0), row[0] + " column " + row[k]);
  }
  for (std::size_t i = 1; i < cls_rows.size() && i <= cfg.algorithms.size(); ++i) {
    const auto& row = cls_rows[i];
    c.expect(row.size() == 5 && row[0] == algorithm_name(cfg.algorithms[i - 1]), "classification row " + row[0]);
    if (row.size() != 5) continue;
    c.expect(in_unit(row[2], 100.0), row[0] + " accuracy " + row[2]);
    c.expect(row[3] == "n/a" || in_unit(row[3], 1.0), row[0] + " f1 " + row[3]);
    c.expect(in_unit(row[4], 1.0), row[0] + " kappa " + row[4]);
  }
  c.note(std::to_string(cfg.algorithms.size()) + " algorithms");
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  void (*run)(Check&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"AC1", "metric oracle equivalence", 10.0, ac1},
      {"AC2", "worked fixtures", 0.0, ac2},
      {"AC3", "perfect-segmentation identities", 0.0, ac3},
      {"AC4", "segmentation invariants", 30.0, ac4},
      {"AC5", "oracle upper bound", 0.0, ac5},
      {"AC6", "end-to-end synthetic pipeline", 60.0, ac6},
      {"AC7", "SVM sanity", 0.0, ac7},
      {"AC8", "external-feature path, structural CSV check", 0.0, ac8},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_seconds > 0.0) {
      check.expect(seconds < cr.budget_seconds, "runtime over " + std::to_string(cr.budget_seconds) + " s");
    }
    const bool ok = check.ok();
    failed += !ok;
    std::printf("%s %s  %s (%.2f s) %s\n", cr.id, ok ? "PASS" : "FAIL", cr.name, seconds, check.summary().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
