#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

#include "segclass/superpixels.hpp"

namespace segclass {
namespace {

struct Candidate {
  double cost;
  RegionId first;
  RegionId second;
  std::uint32_t first_version;
  std::uint32_t second_version;

  // Min-heap on (cost, first, second).
  bool operator>(const Candidate& o) const {
    return std::tie(cost, first, second) > std::tie(o.cost, o.first, o.second);
  }
};

class RegionTable {
 public:
  RegionTable(const RasterImage& img, MergeCriterion criterion)
      : channels_(static_cast<std::size_t>(img.channels())), criterion_(criterion) {
    const std::size_t n = img.pixel_count();
    sum_.resize(n * channels_);
    count_.assign(n, 1);
    version_.assign(n, 0);
    alive_.assign(n, 1);
    neighbors_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto px = img.pixel(i);
      for (std::size_t c = 0; c < channels_; ++c) sum_[i * channels_ + c] = px[c];
    }
    const int h = img.height(), w = img.width();
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const auto i = static_cast<RegionId>(r * w + c);
        if (c + 1 < w) link(i, i + 1);
        if (r + 1 < h) link(i, i + w);
      }
    }
  }

  double cost(RegionId a, RegionId b) const {
    const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
    const double na = static_cast<double>(count_[ia]), nb = static_cast<double>(count_[ib]);
    double d2 = 0.0;
    for (std::size_t c = 0; c < channels_; ++c) {
      const double diff = sum_[ia * channels_ + c] / na - sum_[ib * channels_ + c] / nb;
      d2 += diff * diff;
    }
    return criterion_ == MergeCriterion::kWard ? (na * nb / (na + nb)) * d2 : d2;
  }

  Candidate candidate(RegionId a, RegionId b) const {
    if (a > b) std::swap(a, b);
    return {cost(a, b), a, b, version_[static_cast<std::size_t>(a)], version_[static_cast<std::size_t>(b)]};
  }

  bool valid(const Candidate& c) const {
    const auto a = static_cast<std::size_t>(c.first), b = static_cast<std::size_t>(c.second);
    return alive_[a] && alive_[b] && version_[a] == c.first_version && version_[b] == c.second_version;
  }

  // Merges `second` into `first`; returns the merged region's neighbors.
  const std::set<RegionId>& merge(RegionId first, RegionId second) {
    const auto a = static_cast<std::size_t>(first), b = static_cast<std::size_t>(second);
    for (std::size_t c = 0; c < channels_; ++c) sum_[a * channels_ + c] += sum_[b * channels_ + c];
    count_[a] += count_[b];
    alive_[b] = 0;
    ++version_[a];
    for (RegionId nb : neighbors_[b]) {
      auto& theirs = neighbors_[static_cast<std::size_t>(nb)];
      theirs.erase(second);
      if (nb != first) {
        theirs.insert(first);
        neighbors_[a].insert(nb);
      }
    }
    neighbors_[a].erase(second);
    neighbors_[b].clear();
    return neighbors_[a];
  }

  const std::set<RegionId>& neighbors(RegionId r) const { return neighbors_[static_cast<std::size_t>(r)]; }
  bool alive(RegionId r) const { return alive_[static_cast<std::size_t>(r)] != 0; }

 private:
  void link(RegionId a, RegionId b) {
    neighbors_[static_cast<std::size_t>(a)].insert(b);
    neighbors_[static_cast<std::size_t>(b)].insert(a);
  }

  std::size_t channels_;
  MergeCriterion criterion_;
  std::vector<double> sum_;
  std::vector<std::int64_t> count_;
  std::vector<std::uint32_t> version_;
  std::vector<char> alive_;
  std::vector<std::set<RegionId>> neighbors_;
};

}  // namespace

MergeResult hswo_merge_traced(const RasterImage& img, const MergeParams& p) {
  p.validate();
  const std::size_t n = img.pixel_count();
  if (static_cast<std::size_t>(p.target_regions) > n)
    throw std::invalid_argument("HSWO: target_regions " + std::to_string(p.target_regions) + " exceeds pixel count " +
                                std::to_string(n));
  RegionTable table(img, p.dissimilarity);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<RegionId>(i);
    for (RegionId nb : table.neighbors(id)) {
      if (nb > id) heap.push(table.candidate(id, nb));
    }
  }

  MergeResult result;
  std::size_t regions = n;
  while (regions > static_cast<std::size_t>(p.target_regions) && !heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (!table.valid(top)) continue;
    result.trace.push_back({top.first, top.second, top.cost});
    const auto& merged_neighbors = table.merge(top.first, top.second);
    for (RegionId nb : merged_neighbors) heap.push(table.candidate(top.first, nb));
    --regions;
  }

  // Merges always point from a larger id to a smaller one, so one ascending
  // pass resolves every pixel to its surviving region.
  std::vector<RegionId> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[i] = static_cast<RegionId>(i);
  for (const MergeStep& step : result.trace) owner[static_cast<std::size_t>(step.second)] = step.first;
  Grid<RegionId> ids(img.height(), img.width());
  for (std::size_t i = 0; i < n; ++i) {
    const auto o = static_cast<std::size_t>(owner[i]);
    ids[i] = o == i ? static_cast<RegionId>(i) : ids[o];
  }
  result.segmentation = relabel_contiguous(ids);
  return result;
}

Segmentation hswo_merge(const RasterImage& img, const MergeParams& p) { return hswo_merge_traced(img, p).segmentation; }

}  // namespace segclass
