#pragma once

// Per-region samples: multi-scale patches centered on each region, resized,
// described, and concatenated in ascending scale order.

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "segclass/raster.hpp"

namespace segclass {

struct PatchSpec {
  std::vector<int> scales{32, 64, 128};
  int resize_to = 228;
  void validate() const;
};

/// One row of `dim` reals per region, indexed by region id.
class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(int rows, int dim);
  FeatureSet(int rows, int dim, std::vector<double> values);

  int rows() const noexcept { return rows_; }
  int dim() const noexcept { return dim_; }
  std::span<const double> row(int i) const {
    return {values_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<double> row(int i) {
    return {values_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const FeatureSet&) const = default;

 private:
  int rows_ = 0;
  int dim_ = 0;
  std::vector<double> values_;
};

enum class DescriptorKind { kBuiltinStats, kExternalFile };

struct Descriptor {
  DescriptorKind kind = DescriptorKind::kBuiltinStats;
  std::filesystem::path external_path;  // used by kExternalFile
};

/// side x side crop centered at the rounded center, translated to lie inside
/// the image. Throws std::invalid_argument when side exceeds the image.
RasterImage extract_patch(const RasterImage& img, double center_row, double center_col, int side);

/// Corner-aligned bilinear resize to out_side x out_side.
RasterImage resize_patch(const RasterImage& patch, int out_side);

/// Per channel: mean, standard deviation, 8-bin histogram summing to 1.
std::vector<double> describe_builtin(const RasterImage& patch);
inline constexpr int kBuiltinValuesPerChannel = 10;

FeatureSet build_samples(const RasterImage& img, const Segmentation& seg, const PatchSpec& spec,
                         const Descriptor& descriptor);

/// Rows of `region_id, v1, ..., vd`; `#` starts a comment. Throws FormatError
/// on parse errors, inconsistent dims, duplicate ids, or an empty file.
std::map<RegionId, std::vector<double>> load_external_features(const std::filesystem::path& path);

/// Orders loaded vectors by region id; every id in [0, region_count) must be
/// present exactly once.
FeatureSet features_for_regions(const std::map<RegionId, std::vector<double>>& vectors, int region_count);

void save_features(const FeatureSet& features, const std::filesystem::path& path);

}  // namespace segclass
