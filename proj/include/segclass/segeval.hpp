#pragma once

// Segmentation quality against pixel ground truth: undersegmentation error,
// boundary recall, average purity and oracle accuracy. Unlabeled ground-truth
// pixels are left out of every count.

#include <ostream>
#include <string>
#include <vector>

#include "segclass/raster.hpp"

namespace segclass {

struct SegMetricsReport {
  int region_count = 0;
  double ue = 0.0;
  double br = 0.0;
  double ap = 0.0;
  double oracle = 0.0;
};

/// UE = (1/N) sum_S sum_{P meets S} min(|P n S|, |P \ S|) with S ranging over
/// the 4-connected components of each class. Throws std::invalid_argument on
/// a size mismatch or an all-unlabeled ground truth.
double undersegmentation_error(const Segmentation& seg, const LabelMap& gt);

/// Fraction of ground-truth boundary pixels with a segmentation boundary
/// pixel within Chebyshev distance `tol`. 1.0 when gt has no boundary.
double boundary_recall(const Segmentation& seg, const LabelMap& gt, int tol = 3);

/// Unweighted mean over regions of dominant-class share.
double average_purity(const Segmentation& seg, const LabelMap& gt);

/// Pixel accuracy of painting each region with its majority label.
double oracle_accuracy(const Segmentation& seg, const LabelMap& gt);

SegMetricsReport evaluate_segmentation(const Segmentation& seg, const LabelMap& gt, int tol = 3);

/// Number of labeled ground-truth pixels (the weight used when pooling tiles).
std::int64_t labeled_pixel_count(const LabelMap& gt);

/// One Table-1 style row per algorithm.
struct SegMetricsRow {
  std::string algorithm;
  SegMetricsReport report;
};

inline constexpr const char* kSegMetricsHeader = "algorithm,regions,ue_pct,br_pct,ap_pct,oracle_pct";
void write_seg_metrics_csv(std::ostream& out, const std::vector<SegMetricsRow>& rows);

}  // namespace segclass
