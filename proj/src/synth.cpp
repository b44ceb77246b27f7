#include "segclass/synth.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <stdexcept>

namespace segclass {
namespace {

constexpr ClassId kBackground = 0;
constexpr ClassId kBuilding = 1;
constexpr ClassId kCar = 2;

// Mean image color per class.
constexpr std::array<std::array<float, 3>, 3> kClassColor = {{
    {0.55f, 0.55f, 0.50f},
    {0.80f, 0.30f, 0.25f},
    {0.15f, 0.35f, 0.80f},
}};

constexpr int kAttempts = 200;
constexpr int kGapDivisor = 16;  // clearance between shapes, fraction of the short side

struct Box {
  int top = 0, left = 0, height = 0, width = 0;
  bool near(const Box& o, int gap) const {
    return top < o.top + o.height + gap && o.top < top + height + gap && left < o.left + o.width + gap &&
           o.left < left + width + gap;
  }
};

}  // namespace

void SynthParams::validate() const {
  if (height < 16 || width < 16) throw std::invalid_argument("synthetic scene must be at least 16x16");
  if (shapes < 0) throw std::invalid_argument("shape count must be >= 0");
  if (noise < 0.0) throw std::invalid_argument("noise must be >= 0");
}

Palette synth_palette() {
  return Palette({{"impervious", {255, 255, 255}}, {"building", {0, 0, 255}}, {"car", {255, 255, 0}}});
}

SynthScene synthesize_scene(const SynthParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  LabelMap truth(p.height, p.width, kBackground);
  const int short_side = std::min(p.height, p.width);
  const int gap = std::max(2, short_side / kGapDivisor);
  std::vector<Box> placed;
  int shapes = 0;
  const int buildings = std::max(1, p.shapes / 3);
  for (int s = 0; s < p.shapes; ++s) {
    const bool car = s >= buildings;
    const int radius = car ? uniform(std::max(2, short_side / 32), std::max(3, short_side / 23))
                           : uniform(std::max(4, short_side / 11), std::max(5, short_side / 8));
    const int side = 2 * radius + 1;
    if (side > p.height || side > p.width) continue;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      const Box b{uniform(0, p.height - side), uniform(0, p.width - side), side, side};
      if (std::any_of(placed.begin(), placed.end(), [&](const Box& o) { return b.near(o, gap); })) continue;
      placed.push_back(b);
      ++shapes;
      const int cr = b.top + radius, cc = b.left + radius;
      for (int r = b.top; r < b.top + side; ++r) {
        for (int c = b.left; c < b.left + side; ++c) {
          if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= radius * radius) truth(r, c) = car ? kCar : kBuilding;
        }
      }
      break;
    }
  }

  std::normal_distribution<float> gauss(0.0f, static_cast<float>(p.noise));
  RasterImage image(p.height, p.width, 3);
  for (int r = 0; r < p.height; ++r) {
    for (int c = 0; c < p.width; ++c) {
      const auto& color = kClassColor[static_cast<std::size_t>(truth(r, c))];
      for (int ch = 0; ch < 3; ++ch) {
        image.at(r, c, ch) = std::clamp(color[static_cast<std::size_t>(ch)] + gauss(rng), 0.0f, 1.0f);
      }
    }
  }
  return {std::move(image), std::move(truth), shapes};
}

}  // namespace segclass
