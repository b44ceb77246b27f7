#pragma once

#include <span>
#include <vector>

#include "segclass/raster.hpp"

namespace segclass {

/// Real-valued multi-channel image with no range constraint, used as the
/// clustering space of the superpixel algorithms (e.g. CIELAB).
class ChannelImage {
 public:
  ChannelImage() = default;
  ChannelImage(int height, int width, int channels);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  double& at(int row, int col, int ch) { return values_[offset(row, col) + static_cast<std::size_t>(ch)]; }
  double at(int row, int col, int ch) const { return values_[offset(row, col) + static_cast<std::size_t>(ch)]; }
  std::span<const double> pixel(std::size_t index) const {
    return {values_.data() + index * static_cast<std::size_t>(channels_), static_cast<std::size_t>(channels_)};
  }
  std::span<double> pixel(std::size_t index) {
    return {values_.data() + index * static_cast<std::size_t>(channels_), static_cast<std::size_t>(channels_)};
  }

 private:
  std::size_t offset(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col)) *
           static_cast<std::size_t>(channels_);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

/// sRGB (channel order R,G,B) to CIELAB under D65; L in [0,100].
/// Throws std::invalid_argument unless the image has exactly 3 channels.
ChannelImage rgb_to_lab(const RasterImage& img);

/// Lab for 3-channel inputs, raw intensities otherwise.
ChannelImage clustering_space(const RasterImage& img);

}  // namespace segclass
