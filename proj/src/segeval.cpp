#include "segclass/segeval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace segclass {
namespace {

void require_same_shape(const Segmentation& seg, const LabelMap& gt) {
  if (!seg.ids().same_shape(gt))
    throw std::invalid_argument("segmentation is " + std::to_string(seg.height()) + "x" + std::to_string(seg.width()) +
                                " but ground truth is " + std::to_string(gt.height()) + "x" +
                                std::to_string(gt.width()));
}

// Per-region class histogram over labeled pixels.
struct RegionClassCounts {
  std::size_t classes = 0;
  std::vector<std::int64_t> counts;  // region-major
  std::vector<std::int64_t> labeled;

  RegionClassCounts(const Segmentation& seg, const LabelMap& gt) {
    ClassId max_class = -1;
    for (ClassId c : gt.cells()) max_class = std::max(max_class, c);
    classes = static_cast<std::size_t>(max_class + 1);
    counts.assign(static_cast<std::size_t>(seg.region_count()) * classes, 0);
    labeled.assign(static_cast<std::size_t>(seg.region_count()), 0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] == kUnlabeled) continue;
      const auto region = static_cast<std::size_t>(seg[i]);
      ++counts[region * classes + static_cast<std::size_t>(gt[i])];
      ++labeled[region];
    }
  }

  std::int64_t dominant(std::size_t region) const {
    std::int64_t best = 0;
    for (std::size_t c = 0; c < classes; ++c) best = std::max(best, counts[region * classes + c]);
    return best;
  }
};

}  // namespace

std::int64_t labeled_pixel_count(const LabelMap& gt) {
  return static_cast<std::int64_t>(std::count_if(gt.cells().begin(), gt.cells().end(),
                                                 [](ClassId c) { return c != kUnlabeled; }));
}

double undersegmentation_error(const Segmentation& seg, const LabelMap& gt) {
  require_same_shape(seg, gt);
  const std::int64_t n = labeled_pixel_count(gt);
  if (n == 0) throw std::invalid_argument("ground truth has no labeled pixels");
  const Segmentation segments = connected_components(gt);

  std::vector<std::int64_t> region_size(static_cast<std::size_t>(seg.region_count()), 0);
  std::unordered_map<std::int64_t, std::int64_t> overlap;  // key: segment * regions + region
  const auto regions = static_cast<std::int64_t>(seg.region_count());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kUnlabeled) continue;
    ++region_size[static_cast<std::size_t>(seg[i])];
    ++overlap[static_cast<std::int64_t>(segments[i]) * regions + seg[i]];
  }
  std::int64_t leak = 0;
  for (const auto& [key, inside] : overlap) {
    const std::int64_t outside = region_size[static_cast<std::size_t>(key % regions)] - inside;
    leak += std::min(inside, outside);
  }
  return static_cast<double>(leak) / static_cast<double>(n);
}

double boundary_recall(const Segmentation& seg, const LabelMap& gt, int tol) {
  require_same_shape(seg, gt);
  if (tol < 0) throw std::invalid_argument("boundary tolerance must be >= 0");
  const BoundaryMask gt_edges = extract_boundaries(gt);
  const BoundaryMask seg_edges = extract_boundaries(seg);
  const int h = gt.height(), w = gt.width();

  // Summed-area table of segmentation boundary pixels.
  std::vector<std::int64_t> sat(static_cast<std::size_t>(h + 1) * static_cast<std::size_t>(w + 1), 0);
  auto at = [&sat, w](int r, int c) -> std::int64_t& {
    return sat[static_cast<std::size_t>(r) * static_cast<std::size_t>(w + 1) + static_cast<std::size_t>(c)];
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) at(r + 1, c + 1) = seg_edges(r, c) + at(r, c + 1) + at(r + 1, c) - at(r, c);
  }

  std::int64_t positives = 0, recalled = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!gt_edges(r, c) || gt(r, c) == kUnlabeled) continue;
      ++positives;
      const int r0 = std::max(0, r - tol), r1 = std::min(h, r + tol + 1);
      const int c0 = std::max(0, c - tol), c1 = std::min(w, c + tol + 1);
      if (at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0) > 0) ++recalled;
    }
  }
  return positives == 0 ? 1.0 : static_cast<double>(recalled) / static_cast<double>(positives);
}

double average_purity(const Segmentation& seg, const LabelMap& gt) {
  require_same_shape(seg, gt);
  const RegionClassCounts counts(seg, gt);
  double sum = 0.0;
  std::int64_t regions = 0;
  for (std::size_t region = 0; region < counts.labeled.size(); ++region) {
    if (counts.labeled[region] == 0) continue;
    sum += static_cast<double>(counts.dominant(region)) / static_cast<double>(counts.labeled[region]);
    ++regions;
  }
  if (regions == 0) throw std::invalid_argument("no region contains labeled ground-truth pixels");
  return sum / static_cast<double>(regions);
}

double oracle_accuracy(const Segmentation& seg, const LabelMap& gt) {
  require_same_shape(seg, gt);
  const std::vector<ClassId> majority = majority_label(seg, gt);
  std::int64_t labeled = 0, correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kUnlabeled) continue;
    ++labeled;
    if (majority[static_cast<std::size_t>(seg[i])] == gt[i]) ++correct;
  }
  if (labeled == 0) throw std::invalid_argument("ground truth has no labeled pixels");
  return static_cast<double>(correct) / static_cast<double>(labeled);
}

SegMetricsReport evaluate_segmentation(const Segmentation& seg, const LabelMap& gt, int tol) {
  return {seg.region_count(), undersegmentation_error(seg, gt), boundary_recall(seg, gt, tol),
          average_purity(seg, gt), oracle_accuracy(seg, gt)};
}

void write_seg_metrics_csv(std::ostream& out, const std::vector<SegMetricsRow>& rows) {
  out << kSegMetricsHeader << '\n';
  char buf[256];
  for (const auto& row : rows) {
    const auto& m = row.report;
    std::snprintf(buf, sizeof buf, "%d,%.2f,%.2f,%.2f,%.2f", m.region_count, 100.0 * m.ue, 100.0 * m.br, 100.0 * m.ap,
                  100.0 * m.oracle);
    out << row.algorithm << ',' << buf << '\n';
  }
}

}  // namespace segclass
