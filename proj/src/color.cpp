#include "segclass/color.hpp"

#include <cmath>
#include <stdexcept>

namespace segclass {
namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kEpsilon = 216.0 / 24389.0;
  constexpr double kKappa = 24389.0 / 27.0;
  return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

}  // namespace

ChannelImage::ChannelImage(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels),
      values_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * static_cast<std::size_t>(channels),
              0.0) {
  if (height < 0 || width < 0 || channels < 1) throw std::invalid_argument("invalid channel image shape");
}

ChannelImage rgb_to_lab(const RasterImage& img) {
  if (img.channels() != 3)
    throw std::invalid_argument("rgb_to_lab needs 3 channels, got " + std::to_string(img.channels()));
  // D65 reference white.
  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
  ChannelImage lab(img.height(), img.width(), 3);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto px = img.pixel(i);
    const double r = srgb_to_linear(px[0]);
    const double g = srgb_to_linear(px[1]);
    const double b = srgb_to_linear(px[2]);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
    auto out = lab.pixel(i);
    out[0] = 116.0 * fy - 16.0;
    out[1] = 500.0 * (fx - fy);
    out[2] = 200.0 * (fy - fz);
  }
  return lab;
}

ChannelImage clustering_space(const RasterImage& img) {
  if (img.channels() == 3) return rgb_to_lab(img);
  ChannelImage out(img.height(), img.width(), img.channels());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto src = img.pixel(i);
    auto dst = out.pixel(i);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c];
  }
  return out;
}

}  // namespace segclass
