#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "segclass/claseval.hpp"
#include "segclass/classify.hpp"
#include "segclass/segeval.hpp"
#include "support.hpp"

using namespace segtest;

namespace {

bool all_unlabeled(const LabelMap& gt) {
  return std::all_of(gt.cells().begin(), gt.cells().end(), [](ClassId v) { return v == kUnlabeled; });
}

void expect_matches_oracle(const Segmentation& seg, const LabelMap& gt) {
  ASSERT_NEAR(undersegmentation_error(seg, gt), oracle::undersegmentation_error(seg, gt), 1e-12);
  ASSERT_NEAR(average_purity(seg, gt), oracle::average_purity(seg, gt), 1e-12);
  ASSERT_NEAR(oracle_accuracy(seg, gt), oracle::oracle_accuracy(seg, gt), 1e-12);
  for (int tol : {0, 1, 3}) ASSERT_NEAR(boundary_recall(seg, gt, tol), oracle::boundary_recall(seg, gt, tol), 1e-12);
}

// Calls fn(gt, raw region ids) for every assignment of `classes` values plus
// kUnlabeled and up to `regions` region ids on an h x w grid.
template <typename Fn>
void enumerate(int h, int w, int classes, int regions, Fn fn) {
  const int cells = h * w;
  const int label_values = classes + 1;
  std::vector<int> gt_digits(static_cast<std::size_t>(cells), 0), seg_digits(static_cast<std::size_t>(cells), 0);
  auto advance = [](std::vector<int>& digits, int base) {
    for (int& d : digits) {
      if (++d < base) return true;
      d = 0;
    }
    return false;
  };
  do {
    LabelMap gt(h, w);
    for (int i = 0; i < cells; ++i) gt[static_cast<std::size_t>(i)] = gt_digits[static_cast<std::size_t>(i)] - 1;
    std::fill(seg_digits.begin(), seg_digits.end(), 0);
    do {
      fn(gt, Grid<RegionId>(h, w, std::vector<RegionId>(seg_digits.begin(), seg_digits.end())));
    } while (advance(seg_digits, regions));
  } while (advance(gt_digits, label_values));
}

}  // namespace

TEST(SegEval, FourByFourFixture) {
  const LabelMap gt = four_by_four_truth();
  const Segmentation seg = four_by_four_segmentation();
  EXPECT_DOUBLE_EQ(undersegmentation_error(seg, gt), 0.5);
  EXPECT_DOUBLE_EQ(average_purity(seg, gt), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(oracle_accuracy(seg, gt), 0.75);
  EXPECT_DOUBLE_EQ(boundary_recall(seg, gt, 0), 0.5);
  EXPECT_DOUBLE_EQ(boundary_recall(seg, gt, 3), 1.0);

  const SegMetricsReport r = evaluate_segmentation(seg, gt, 3);
  EXPECT_EQ(r.region_count, 2);
  EXPECT_DOUBLE_EQ(r.ue, 0.5);
  EXPECT_DOUBLE_EQ(r.br, 1.0);
}

TEST(SegEval, PerfectSegmentationIdentities) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 1, trial % 2 ? 0.15 : 0.0);
    const Segmentation seg = connected_components(f.gt);
    EXPECT_DOUBLE_EQ(undersegmentation_error(seg, f.gt), 0.0);
    EXPECT_DOUBLE_EQ(boundary_recall(seg, f.gt, 0), 1.0);
    EXPECT_DOUBLE_EQ(average_purity(seg, f.gt), 1.0);
    EXPECT_DOUBLE_EQ(oracle_accuracy(seg, f.gt), 1.0);

    const LabelMap painted = build_semantic_map(seg, majority_label(seg, f.gt));
    for (std::size_t i = 0; i < painted.size(); ++i) {
      if (f.gt[i] != kUnlabeled) ASSERT_EQ(painted[i], f.gt[i]);
    }
    const ConfusionMatrix cm = confusion(painted, f.gt, 4);
    EXPECT_DOUBLE_EQ(overall_accuracy(cm), 1.0);
    EXPECT_DOUBLE_EQ(cohen_kappa(cm), 1.0);
  }
}

TEST(SegEval, UnlabeledPixelsAreIgnored) {
  // Region 1 holds only unlabeled pixels: it leaves AP's average and adds nothing to UE.
  const LabelMap gt = labels({{0, 0, kUnlabeled}, {1, 1, kUnlabeled}});
  const Segmentation seg = segmentation({{0, 0, 1}, {0, 0, 1}});
  EXPECT_DOUBLE_EQ(average_purity(seg, gt), 0.5);
  EXPECT_DOUBLE_EQ(oracle_accuracy(seg, gt), 0.5);
  EXPECT_DOUBLE_EQ(undersegmentation_error(seg, gt), (2.0 + 2.0) / 4.0);
  // The unlabeled column sits on a segmentation edge but is not a positive:
  // 2 of the 4 labeled gt boundary pixels are hit, not 4 of 6.
  EXPECT_DOUBLE_EQ(boundary_recall(seg, gt, 0), 0.5);
  EXPECT_EQ(labeled_pixel_count(gt), 4);
}

TEST(SegEval, Errors) {
  const Segmentation seg = four_by_four_segmentation();
  EXPECT_THROW(undersegmentation_error(seg, LabelMap(3, 4, 0)), std::invalid_argument);
  EXPECT_THROW(boundary_recall(seg, LabelMap(4, 3, 0)), std::invalid_argument);
  const LabelMap empty(4, 4, kUnlabeled);
  EXPECT_THROW(undersegmentation_error(seg, empty), std::invalid_argument);
  EXPECT_THROW(average_purity(seg, empty), std::invalid_argument);
  EXPECT_THROW(oracle_accuracy(seg, empty), std::invalid_argument);
  EXPECT_THROW(boundary_recall(seg, four_by_four_truth(), -1), std::invalid_argument);
  EXPECT_DOUBLE_EQ(boundary_recall(seg, LabelMap(4, 4, 2)), 1.0);
}

TEST(SegEval, ExhaustiveSmallGridsMatchOracle) {
  int checked = 0;
  for (auto [h, w] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 1}, std::pair{1, 3}, std::pair{3, 1},
                      std::pair{1, 4}, std::pair{2, 2}, std::pair{4, 1}}) {
    enumerate(h, w, 3, 4, [&](const LabelMap& gt, const Grid<RegionId>& raw) {
      if (all_unlabeled(gt)) return;
      expect_matches_oracle(relabel_contiguous(raw), gt);
      ++checked;
    });
  }
  EXPECT_GT(checked, 190000);
}

TEST(SegEval, RandomGridsUpToSixBySixMatchOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomFixture f = random_fixture(rng, 6, 3, 4);
    expect_matches_oracle(f.seg, f.gt);
  }
}

TEST(SegEval, RandomGridsUpToEightByEightMatchOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 5);
    expect_matches_oracle(f.seg, f.gt);
  }
}

TEST(SegEval, InvariantUnderRegionAndClassPermutation) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 6);
    std::vector<RegionId> rperm(static_cast<std::size_t>(f.seg.region_count()));
    std::iota(rperm.begin(), rperm.end(), 0);
    std::shuffle(rperm.begin(), rperm.end(), rng);
    std::vector<ClassId> cperm(static_cast<std::size_t>(f.classes));
    std::iota(cperm.begin(), cperm.end(), 0);
    std::shuffle(cperm.begin(), cperm.end(), rng);

    Grid<RegionId> ids(f.seg.height(), f.seg.width());
    LabelMap gt(f.gt.height(), f.gt.width());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      ids[i] = rperm[static_cast<std::size_t>(f.seg[i])];
      gt[i] = f.gt[i] == kUnlabeled ? kUnlabeled : cperm[static_cast<std::size_t>(f.gt[i])];
    }
    const Segmentation seg(ids, f.seg.region_count());
    const SegMetricsReport a = evaluate_segmentation(f.seg, f.gt, 1), b = evaluate_segmentation(seg, gt, 1);
    EXPECT_NEAR(a.ue, b.ue, 1e-12);
    EXPECT_NEAR(a.br, b.br, 1e-12);
    EXPECT_NEAR(a.ap, b.ap, 1e-12);
    EXPECT_NEAR(a.oracle, b.oracle, 1e-12);
  }
}

TEST(SegEval, OracleBoundsEveryRegionConstantLabeling) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 6);
    const double best = oracle_accuracy(f.seg, f.gt);
    std::uniform_int_distribution<ClassId> cls(0, f.classes - 1);
    for (int draw = 0; draw < 100; ++draw) {
      std::vector<ClassId> region_labels(static_cast<std::size_t>(f.seg.region_count()));
      for (ClassId& c : region_labels) c = cls(rng);
      const LabelMap pred = build_semantic_map(f.seg, region_labels);
      ASSERT_LE(overall_accuracy(confusion(pred, f.gt, f.classes)), best + 1e-12);
    }
    std::vector<ClassId> majority = majority_label(f.seg, f.gt);
    for (ClassId& c : majority) c = c == kUnlabeled ? 0 : c;
    EXPECT_NEAR(overall_accuracy(confusion(build_semantic_map(f.seg, majority), f.gt, f.classes)), best, 1e-12);
  }
}

TEST(SegEval, SplittingARegionNeverLowersOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const RandomFixture f = random_fixture(rng, 8, 4, 5);
    const RegionId target = std::uniform_int_distribution<RegionId>(0, f.seg.region_count() - 1)(rng);
    Grid<RegionId> split = f.seg.ids();
    std::bernoulli_distribution coin(0.5);
    for (auto& id : split.cells()) {
      if (id == target && coin(rng)) id = f.seg.region_count();
    }
    EXPECT_GE(oracle_accuracy(relabel_contiguous(split), f.gt), oracle_accuracy(f.seg, f.gt) - 1e-12);
  }
}

TEST(SegEval, MetricsStayInUnitInterval) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomFixture f = random_fixture(rng, 10, 4, 8, 0.3);
    const SegMetricsReport r = evaluate_segmentation(f.seg, f.gt);
    for (double v : {r.ue, r.br, r.ap, r.oracle}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(SegEval, CsvLayout) {
  std::ostringstream out;
  write_seg_metrics_csv(out, {{"slic", {2, 0.5, 1.0, 5.0 / 6.0, 0.75}}});
  EXPECT_EQ(out.str(), "algorithm,regions,ue_pct,br_pct,ap_pct,oracle_pct\nslic,2,50.00,100.00,83.33,75.00\n");
}
