#pragma once

// File formats: 8-bit PNG / binary PPM / PGM images, palette-coded label
// PNGs, and segmentations as 16-bit PNG + header sidecar or text grids.

#include <filesystem>
#include <optional>

#include "segclass/raster.hpp"

namespace segclass {

/// Reads PNG, binary PPM (P6) or PGM (P5). Samples are mapped by v / 255.
/// Throws FormatError for unreadable files or bit depths other than 8.
RasterImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (1-4 channels), intensities rounded from [0,1].
void save_png(const RasterImage& img, const std::filesystem::path& path);

/// Writes binary PGM (1 channel) or PPM (3 channels).
void save_pnm(const RasterImage& img, const std::filesystem::path& path);

/// Palette text file: one `name r g b` entry per line (commas allowed as
/// separators, `#` starts a comment). A line whose name is `unlabeled`
/// declares the color of kUnlabeled pixels instead of a class.
Palette load_palette(const std::filesystem::path& path);
void save_palette(const Palette& palette, const std::filesystem::path& path);

/// Decodes a color-coded label image. Colors missing from the palette map to
/// kUnlabeled when `unknown_as_unlabeled` is set, otherwise FormatError names
/// the color and the pixel.
LabelMap load_labels(const std::filesystem::path& path, const Palette& palette,
                     bool unknown_as_unlabeled = false);

/// Paints ids with palette colors. Throws std::invalid_argument for ids
/// without a palette entry.
RasterImage render_labels(const Grid<std::int32_t>& labels, const Palette& palette);

/// Overdraws marked pixels of a 3-channel image with `color`.
void overlay_boundaries(RasterImage& img, const BoundaryMask& mask, Rgb color);

void save_labels(const LabelMap& labels, const Palette& palette, const std::filesystem::path& path);

/// `.png` paths store 16-bit ids plus a `<path>.hdr` sidecar holding the
/// dimensions and region_count; any other extension stores a text grid
/// (first line `height width region_count`, then one row of ids per line).
void save_segmentation(const Segmentation& seg, const std::filesystem::path& path);
Segmentation load_segmentation(const std::filesystem::path& path);

}  // namespace segclass
