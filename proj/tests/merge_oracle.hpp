#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "segclass/superpixels.hpp"

namespace oracle {

using segclass::MergeCriterion;
using segclass::MergeParams;
using segclass::MergeStep;
using segclass::RasterImage;
using segclass::RegionId;

// Best-merge by exhaustive scan of every adjacent pair at every step.
inline std::vector<MergeStep> hswo_trace(const RasterImage& img, const MergeParams& p) {
  const int h = img.height(), w = img.width(), channels = img.channels();
  const auto n = static_cast<std::size_t>(h * w);
  std::vector<RegionId> owner(n);
  std::map<RegionId, std::pair<std::vector<double>, std::int64_t>> regions;
  for (std::size_t i = 0; i < n; ++i) {
    owner[i] = static_cast<RegionId>(i);
    const auto px = img.pixel(i);
    regions[static_cast<RegionId>(i)] = {std::vector<double>(px.begin(), px.end()), 1};
  }
  auto cost = [&](RegionId a, RegionId b) {
    const auto& [sa, na_] = regions.at(a);
    const auto& [sb, nb_] = regions.at(b);
    const double na = static_cast<double>(na_), nb = static_cast<double>(nb_);
    double d2 = 0.0;
    for (int c = 0; c < channels; ++c) {
      const double diff = sa[static_cast<std::size_t>(c)] / na - sb[static_cast<std::size_t>(c)] / nb;
      d2 += diff * diff;
    }
    return p.dissimilarity == MergeCriterion::kWard ? (na * nb / (na + nb)) * d2 : d2;
  };
  std::vector<MergeStep> trace;
  while (regions.size() > static_cast<std::size_t>(p.target_regions)) {
    std::tuple<double, RegionId, RegionId> best{std::numeric_limits<double>::infinity(), 0, 0};
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
          if (r + dr >= h || c + dc >= w) continue;
          RegionId a = owner[static_cast<std::size_t>(r * w + c)];
          RegionId b = owner[static_cast<std::size_t>((r + dr) * w + c + dc)];
          if (a == b) continue;
          if (a > b) std::swap(a, b);
          best = std::min(best, std::tuple{cost(a, b), a, b});
        }
      }
    }
    const auto [best_cost, a, b] = best;
    trace.push_back({a, b, best_cost});
    auto& [sa, na] = regions.at(a);
    const auto& [sb, nb] = regions.at(b);
    for (int c = 0; c < channels; ++c) sa[static_cast<std::size_t>(c)] += sb[static_cast<std::size_t>(c)];
    na += nb;
    regions.erase(b);
    for (RegionId& o : owner) {
      if (o == b) o = a;
    }
  }
  return trace;
}

}  // namespace oracle
