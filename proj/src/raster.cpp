#include "segclass/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace segclass {

RasterImage::RasterImage(int height, int width, int channels, float fill)
    : RasterImage(height, width, channels,
                  std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                         static_cast<std::size_t>(std::max(width, 0)) *
                                         static_cast<std::size_t>(std::max(channels, 0)),
                                     fill)) {}

RasterImage::RasterImage(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height < 0 || width < 0) throw std::invalid_argument("image dimensions must be non-negative");
  if (channels < 1) throw std::invalid_argument("image needs at least one channel");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw std::invalid_argument("image data length does not match height x width x channels");
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("image intensities must lie in [0,1]");
  }
}

Segmentation::Segmentation(Grid<RegionId> ids, int region_count)
    : ids_(std::move(ids)), region_count_(region_count) {
  if (region_count < 0) throw std::invalid_argument("negative region count");
  std::vector<char> seen(static_cast<std::size_t>(region_count), 0);
  int distinct = 0;
  for (RegionId id : ids_.cells()) {
    if (id < 0 || id >= region_count)
      throw std::invalid_argument("region id " + std::to_string(id) + " outside [0, " +
                                  std::to_string(region_count) + ")");
    if (!seen[static_cast<std::size_t>(id)]) {
      seen[static_cast<std::size_t>(id)] = 1;
      ++distinct;
    }
  }
  if (distinct != region_count)
    throw std::invalid_argument("region ids are not contiguous: " + std::to_string(distinct) +
                                " distinct ids for region_count " + std::to_string(region_count));
}

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (entries_[i].color == entries_[j].color)
        throw std::invalid_argument("palette classes '" + entries_[i].name + "' and '" +
                                    entries_[j].name + "' share a display color");
    }
  }
}

ClassId Palette::find(Rgb color) const noexcept {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].color == color) return static_cast<ClassId>(i);
  }
  return kUnlabeled;
}

ClassId Palette::find(const std::string& name) const noexcept {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return static_cast<ClassId>(i);
  }
  return kUnlabeled;
}

void Palette::set_unlabeled_color(Rgb color) {
  if (find(color) != kUnlabeled)
    throw std::invalid_argument("unlabeled color collides with a class color");
  unlabeled_ = color;
  has_unlabeled_ = true;
}

Segmentation relabel_contiguous(const Grid<RegionId>& raw) {
  std::unordered_map<RegionId, RegionId> remap;
  Grid<RegionId> out(raw.height(), raw.width());
  RegionId next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw[i], next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return Segmentation(std::move(out), next);
}

Segmentation connected_components(const Grid<std::int32_t>& map) {
  const int h = map.height();
  const int w = map.width();
  Grid<RegionId> ids(h, w, -1);
  std::vector<std::size_t> stack;
  RegionId next = 0;
  for (std::size_t start = 0; start < map.size(); ++start) {
    if (ids[start] >= 0) continue;
    const std::int32_t value = map[start];
    ids[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int r = static_cast<int>(p / static_cast<std::size_t>(w));
      const int c = static_cast<int>(p % static_cast<std::size_t>(w));
      constexpr int dr[4] = {-1, 1, 0, 0};
      constexpr int dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k];
        const int cc = c + dc[k];
        if (!map.contains(rr, cc)) continue;
        const std::size_t q = map.index(rr, cc);
        if (ids[q] < 0 && map[q] == value) {
          ids[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return Segmentation(std::move(ids), next);
}

RegionStats region_stats(const Segmentation& seg) {
  RegionStats stats(static_cast<std::size_t>(seg.region_count()));
  std::vector<double> sum_r(stats.size(), 0.0), sum_c(stats.size(), 0.0);
  for (auto& s : stats) {
    s.box = {seg.height(), seg.width(), -1, -1};
  }
  for (int r = 0; r < seg.height(); ++r) {
    for (int c = 0; c < seg.width(); ++c) {
      const auto id = static_cast<std::size_t>(seg(r, c));
      auto& s = stats[id];
      ++s.size;
      sum_r[id] += r;
      sum_c[id] += c;
      s.box.row_min = std::min(s.box.row_min, r);
      s.box.row_max = std::max(s.box.row_max, r);
      s.box.col_min = std::min(s.box.col_min, c);
      s.box.col_max = std::max(s.box.col_max, c);
    }
  }
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto n = static_cast<double>(stats[i].size);
    stats[i].centroid_row = sum_r[i] / n;
    stats[i].centroid_col = sum_c[i] / n;
  }
  return stats;
}

std::vector<ClassId> majority_label(const Segmentation& seg, const LabelMap& gt) {
  if (!seg.ids().same_shape(gt)) throw std::invalid_argument("segmentation and ground truth differ in size");
  ClassId max_class = -1;
  for (ClassId c : gt.cells()) max_class = std::max(max_class, c);
  const std::size_t classes = static_cast<std::size_t>(max_class + 1);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(seg.region_count()) * classes, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kUnlabeled) continue;
    if (gt[i] < 0) throw std::invalid_argument("negative class id in ground truth");
    ++counts[static_cast<std::size_t>(seg[i]) * classes + static_cast<std::size_t>(gt[i])];
  }
  std::vector<ClassId> labels(static_cast<std::size_t>(seg.region_count()), kUnlabeled);
  for (std::size_t region = 0; region < labels.size(); ++region) {
    std::int64_t best = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const auto n = counts[region * classes + c];
      if (n > best) {
        best = n;
        labels[region] = static_cast<ClassId>(c);
      }
    }
  }
  return labels;
}

BoundaryMask extract_boundaries(const Grid<std::int32_t>& map) {
  BoundaryMask mask(map.height(), map.width(), 0);
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const auto v = map(r, c);
      if (c + 1 < map.width() && map(r, c + 1) != v) {
        mask(r, c) = 1;
        mask(r, c + 1) = 1;
      }
      if (r + 1 < map.height() && map(r + 1, c) != v) {
        mask(r, c) = 1;
        mask(r + 1, c) = 1;
      }
    }
  }
  return mask;
}

}  // namespace segclass
