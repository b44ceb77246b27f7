#pragma once

// Superpixel and baseline segmentations. Every algorithm is deterministic and
// returns a total partition with contiguous ids.

#include <cstdint>
#include <vector>

#include "segclass/color.hpp"
#include "segclass/raster.hpp"

namespace segclass {

struct SlicParams {
  int k = 400;                       // requested region count
  double compactness = 10.0;         // m
  int max_iters = 10;
  double min_region_fraction = 0.25; // fragments below this fraction of S^2 are absorbed
  void validate() const;
};

struct LscParams {
  int k = 400;
  double ratio = 0.075;              // spatial vs color weight of the embedding
  int max_iters = 10;
  double min_region_fraction = 0.25;
  void validate() const;
};

struct QuickshiftParams {
  double kernel_size = 5.0;  // sigma of the Parzen density, pixels
  double max_dist = 10.0;    // tau, longest parent link, pixels
  double color_ratio = 1.0;  // weight of color against position
  void validate() const;
};

enum class MergeCriterion {
  kWard,          // n1*n2/(n1+n2) * |mean1 - mean2|^2
  kMeanDistance,  // |mean1 - mean2|^2
};

struct MergeParams {
  int target_regions = 400;
  MergeCriterion dissimilarity = MergeCriterion::kWard;
  void validate() const;
};

/// Seed lattice used by SLIC and LSC: rows x cols cells whose product is as
/// close to k as possible, preferring square cells.
struct SeedGrid {
  int rows = 1;
  int cols = 1;
  double step_row = 1.0;
  double step_col = 1.0;
};
SeedGrid seed_grid(int height, int width, int k);

Segmentation slic(const RasterImage& img, const SlicParams& p);

/// Linear spectral clustering: weighted k-means in a trigonometric kernel
/// embedding of (color, position).
Segmentation lsc(const RasterImage& img, const LscParams& p);

/// Embedding of one pixel used by lsc(): (cos, sin) of pi*v/2 for each color
/// channel, then of pi*row/(2*step_row) and pi*col/(2*step_col) scaled by ratio.
std::vector<double> lsc_embedding(std::span<const float> color, double row, double col,
                                  const SeedGrid& grid, double ratio);

struct QuickshiftForest {
  std::vector<double> density;
  std::vector<std::int64_t> parent;  // parent[i] == i marks a root
  Segmentation segmentation;
};

QuickshiftForest quickshift_forest(const RasterImage& img, const QuickshiftParams& p);
Segmentation quickshift(const RasterImage& img, const QuickshiftParams& p);

/// Regular grid baseline. With stride == window the tiles are exact and the
/// last row/column absorbs the remainder; with stride < window every pixel
/// joins the window with the nearest center.
Segmentation sliding_window(int height, int width, int window, int stride);

struct MergeStep {
  RegionId first;   // smaller id; the merged region keeps it
  RegionId second;
  double cost;
};

struct MergeResult {
  Segmentation segmentation;
  std::vector<MergeStep> trace;
};

/// Best-merge region growing from single pixels. Region ids during merging
/// are the index of the region's first pixel. Region means are taken from
/// the raw image channels.
MergeResult hswo_merge_traced(const RasterImage& img, const MergeParams& p);
Segmentation hswo_merge(const RasterImage& img, const MergeParams& p);

/// Absorbs 4-connected components smaller than min_size into their largest
/// adjacent region, then relabels contiguously. Every output region is
/// 4-connected.
Segmentation enforce_connectivity(const Grid<RegionId>& labels, std::int64_t min_size);
inline Segmentation enforce_connectivity(const Segmentation& seg, std::int64_t min_size) {
  return enforce_connectivity(seg.ids(), min_size);
}

/// Number of 4-adjacent pixel pairs carrying different ids (total length of
/// the internal region boundaries).
std::int64_t boundary_length(const Segmentation& seg);

}  // namespace segclass
