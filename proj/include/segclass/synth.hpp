#pragma once

// Synthetic orthoimage generator: an impervious background with round
// buildings and smaller round cars, each class a distinct noisy color. Shapes
// keep a clearance from each other; a shape that finds no free spot after a
// bounded number of draws is dropped.

#include <cstdint>

#include "segclass/raster.hpp"

namespace segclass {

struct SynthParams {
  int height = 256;
  int width = 256;
  int shapes = 15;      // a third buildings, the rest cars
  double noise = 0.015;  // Gaussian sigma on [0,1] intensities
  std::uint64_t seed = 1;
  void validate() const;
};

struct SynthScene {
  RasterImage image;
  LabelMap truth;
  int shapes = 0;  // shapes actually placed
};

/// Classes `impervious`, `building`, `car` with the ISPRS display colors.
Palette synth_palette();

SynthScene synthesize_scene(const SynthParams& p);

}  // namespace segclass
