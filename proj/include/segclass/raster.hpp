#pragma once

// Core raster data model: multi-channel images, label maps, segmentations,
// and the per-region bookkeeping shared by every other module.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace segclass {

using ClassId = std::int32_t;
using RegionId = std::int32_t;

/// Label value for pixels that carry no class (e.g. ISPRS clutter).
inline constexpr ClassId kUnlabeled = -1;

/// Raised for unreadable or malformed files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major height x width grid of cells.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(checked_dim(height)), width_(checked_dim(width)),
        cells_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}
  Grid(int height, int width, std::vector<T> cells)
      : height_(checked_dim(height)), width_(checked_dim(width)), cells_(std::move(cells)) {
    if (cells_.size() != static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_))
      throw std::invalid_argument("grid cell count does not match height x width");
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }

  T& operator()(int row, int col) { return cells_[index(row, col)]; }
  const T& operator()(int row, int col) const { return cells_[index(row, col)]; }
  T& operator[](std::size_t i) { return cells_[i]; }
  const T& operator[](std::size_t i) const { return cells_[i]; }

  std::span<T> cells() noexcept { return cells_; }
  std::span<const T> cells() const noexcept { return cells_; }

  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Grid&) const = default;

 private:
  static int checked_dim(int d) {
    if (d < 0) throw std::invalid_argument("grid dimensions must be non-negative");
    return d;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> cells_;
};

using BoundaryMask = Grid<std::uint8_t>;

/// H x W x C image with intensities in [0,1], interleaved per pixel.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int height, int width, int channels, float fill = 0.0f);
  RasterImage(int height, int width, int channels, std::vector<float> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }

  float& at(int row, int col, int ch) { return data_[offset(row, col) + ch]; }
  float at(int row, int col, int ch) const { return data_[offset(row, col) + ch]; }
  std::span<const float> pixel(int row, int col) const {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }
  std::span<const float> pixel(std::size_t index) const {
    return {data_.data() + index * static_cast<std::size_t>(channels_),
            static_cast<std::size_t>(channels_)};
  }
  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t offset(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
           static_cast<std::size_t>(channels_);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel class ids, kUnlabeled for pixels without ground truth.
class LabelMap : public Grid<ClassId> {
 public:
  using Grid<ClassId>::Grid;
  LabelMap(Grid<ClassId> grid) : Grid<ClassId>(std::move(grid)) {}  // NOLINT
};

/// Total partition of an image into regions numbered [0, region_count).
class Segmentation {
 public:
  Segmentation() = default;
  /// Validates that ids form exactly [0, region_count).
  Segmentation(Grid<RegionId> ids, int region_count);

  int height() const noexcept { return ids_.height(); }
  int width() const noexcept { return ids_.width(); }
  std::size_t size() const noexcept { return ids_.size(); }
  int region_count() const noexcept { return region_count_; }
  RegionId operator()(int row, int col) const { return ids_(row, col); }
  RegionId operator[](std::size_t i) const { return ids_[i]; }
  const Grid<RegionId>& ids() const noexcept { return ids_; }

  bool operator==(const Segmentation&) const = default;

 private:
  Grid<RegionId> ids_;
  int region_count_ = 0;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct PaletteEntry {
  std::string name;
  Rgb color;
};

/// Ordered class list; class id is the entry position.
class Palette {
 public:
  Palette() = default;
  /// Throws std::invalid_argument on duplicate colors.
  explicit Palette(std::vector<PaletteEntry> entries);

  int size() const noexcept { return static_cast<int>(entries_.size()); }
  const PaletteEntry& operator[](ClassId id) const { return entries_.at(static_cast<std::size_t>(id)); }
  const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }
  /// Returns the class id for a color, or kUnlabeled when the color is unknown.
  ClassId find(Rgb color) const noexcept;
  /// Returns the id of the named class, or kUnlabeled.
  ClassId find(const std::string& name) const noexcept;

  /// Optional display color for kUnlabeled pixels.
  void set_unlabeled_color(Rgb color);
  const Rgb* unlabeled_color() const noexcept { return has_unlabeled_ ? &unlabeled_ : nullptr; }

 private:
  std::vector<PaletteEntry> entries_;
  Rgb unlabeled_;
  bool has_unlabeled_ = false;
};

struct BoundingBox {
  int row_min = 0, col_min = 0, row_max = 0, col_max = 0;  // inclusive
};

struct RegionInfo {
  std::int64_t size = 0;
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  BoundingBox box;
};

using RegionStats = std::vector<RegionInfo>;

/// Renumbers ids so the first occurrence in row-major order gets the next unused id.
Segmentation relabel_contiguous(const Grid<RegionId>& raw);

/// 4-connected components of equal-valued cells, numbered in scan order.
Segmentation connected_components(const Grid<std::int32_t>& map);

RegionStats region_stats(const Segmentation& seg);

/// Majority ground-truth class per region; ties go to the smaller class id and
/// regions with only unlabeled pixels get kUnlabeled.
std::vector<ClassId> majority_label(const Segmentation& seg, const LabelMap& gt);

/// Marks cells with at least one 4-neighbor carrying a different id.
BoundaryMask extract_boundaries(const Grid<std::int32_t>& map);
inline BoundaryMask extract_boundaries(const Segmentation& seg) { return extract_boundaries(seg.ids()); }

}  // namespace segclass
