#include "segclass/superpixels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace segclass {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_k(int k, const RasterImage& img) {
  if (static_cast<std::size_t>(k) > img.pixel_count())
    throw std::invalid_argument("requested " + std::to_string(k) + " regions but the image has only " +
                                std::to_string(img.pixel_count()) + " pixels");
}

std::int64_t fragment_threshold(double fraction, double step) {
  return std::max<std::int64_t>(1, std::llround(fraction * step * step));
}

// Initial labels: the seed-grid cell containing each pixel.
Grid<RegionId> grid_labels(int height, int width, const SeedGrid& grid) {
  Grid<RegionId> labels(height, width);
  for (int r = 0; r < height; ++r) {
    const int gr = std::min(grid.rows - 1, static_cast<int>(r / grid.step_row));
    for (int c = 0; c < width; ++c) {
      const int gc = std::min(grid.cols - 1, static_cast<int>(c / grid.step_col));
      labels(r, c) = gr * grid.cols + gc;
    }
  }
  return labels;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

double gradient(const ChannelImage& space, int r, int c) {
  const int h = space.height(), w = space.width();
  const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, h - 1);
  const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, w - 1);
  double g = 0.0;
  for (int ch = 0; ch < space.channels(); ++ch) {
    const double dx = space.at(r, c1, ch) - space.at(r, c0, ch);
    const double dy = space.at(r1, c, ch) - space.at(r0, c, ch);
    g += dx * dx + dy * dy;
  }
  return g;
}

struct Window {
  int row_begin, row_end, col_begin, col_end;  // half-open
};

Window window_around(double row, double col, double radius, int height, int width) {
  return {std::max(0, static_cast<int>(std::ceil(row - radius))),
          std::min(height, static_cast<int>(std::floor(row + radius)) + 1),
          std::max(0, static_cast<int>(std::ceil(col - radius))),
          std::min(width, static_cast<int>(std::floor(col + radius)) + 1)};
}

}  // namespace

void SlicParams::validate() const {
  require(k >= 1, "SLIC: k must be >= 1");
  require(compactness > 0.0, "SLIC: compactness must be > 0");
  require(max_iters >= 1, "SLIC: max_iters must be >= 1");
  require(min_region_fraction > 0.0 && min_region_fraction <= 1.0, "SLIC: min_region_fraction must be in (0,1]");
}

void LscParams::validate() const {
  require(k >= 1, "LSC: k must be >= 1");
  require(ratio > 0.0, "LSC: ratio must be > 0");
  require(max_iters >= 1, "LSC: max_iters must be >= 1");
  require(min_region_fraction > 0.0 && min_region_fraction <= 1.0, "LSC: min_region_fraction must be in (0,1]");
}

void QuickshiftParams::validate() const {
  require(kernel_size > 0.0, "Quickshift: kernel_size must be > 0");
  require(max_dist > 0.0, "Quickshift: max_dist must be > 0");
  require(color_ratio >= 0.0, "Quickshift: color_ratio must be >= 0");
}

void MergeParams::validate() const { require(target_regions >= 1, "HSWO: target_regions must be >= 1"); }

SeedGrid seed_grid(int height, int width, int k) {
  require(height >= 1 && width >= 1, "seed grid needs a non-empty image");
  require(k >= 1, "seed grid needs k >= 1");
  SeedGrid best;
  std::int64_t best_err = std::numeric_limits<std::int64_t>::max();
  double best_aspect = kInf;
  for (int rows = 1; rows <= std::min(k, height); ++rows) {
    const int cols = std::clamp(static_cast<int>(std::lround(static_cast<double>(k) / rows)), 1, width);
    const std::int64_t err = std::abs(static_cast<std::int64_t>(rows) * cols - k);
    const double aspect = std::abs(std::log((static_cast<double>(height) / rows) / (static_cast<double>(width) / cols)));
    if (err < best_err || (err == best_err && aspect < best_aspect)) {
      best_err = err;
      best_aspect = aspect;
      best.rows = rows;
      best.cols = cols;
    }
  }
  best.step_row = static_cast<double>(height) / best.rows;
  best.step_col = static_cast<double>(width) / best.cols;
  return best;
}

Segmentation slic(const RasterImage& img, const SlicParams& p) {
  p.validate();
  require_k(p.k, img);
  const int h = img.height(), w = img.width();
  const ChannelImage space = clustering_space(img);
  const auto channels = static_cast<std::size_t>(space.channels());
  const double step = std::sqrt(static_cast<double>(img.pixel_count()) / p.k);
  const SeedGrid grid = seed_grid(h, w, p.k);
  const double spatial_weight = (p.compactness * p.compactness) / (step * step);

  const std::size_t centers = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
  std::vector<double> center_row(centers), center_col(centers), center_color(centers * channels);
  for (int gr = 0; gr < grid.rows; ++gr) {
    for (int gc = 0; gc < grid.cols; ++gc) {
      const std::size_t k = static_cast<std::size_t>(gr * grid.cols + gc);
      double row = (gr + 0.5) * grid.step_row - 0.5;
      double col = (gc + 0.5) * grid.step_col - 0.5;
      const int rr = std::clamp(static_cast<int>(std::lround(row)), 0, h - 1);
      const int cc = std::clamp(static_cast<int>(std::lround(col)), 0, w - 1);
      // Move to the lowest-gradient pixel of the 3x3 neighborhood; stay put
      // unless a neighbor is strictly lower.
      double best = gradient(space, rr, cc);
      int seed_r = rr, seed_c = cc;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int nr = rr + dr, nc = cc + dc;
          if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
          const double g = gradient(space, nr, nc);
          if (g < best) {
            best = g;
            seed_r = nr;
            seed_c = nc;
          }
        }
      }
      if (seed_r != rr || seed_c != cc) {
        row = seed_r;
        col = seed_c;
      }
      center_row[k] = row;
      center_col[k] = col;
      const auto px = space.pixel(static_cast<std::size_t>(seed_r) * static_cast<std::size_t>(w) +
                                  static_cast<std::size_t>(seed_c));
      std::copy(px.begin(), px.end(), center_color.begin() + static_cast<std::ptrdiff_t>(k * channels));
    }
  }

  Grid<RegionId> labels = grid_labels(h, w, grid);
  std::vector<double> dist(img.pixel_count());
  std::vector<double> sum_row(centers), sum_col(centers), sum_color(centers * channels);
  std::vector<std::int64_t> count(centers);
  for (int iter = 0; iter < p.max_iters; ++iter) {
    std::fill(dist.begin(), dist.end(), kInf);
    for (std::size_t k = 0; k < centers; ++k) {
      const Window win = window_around(center_row[k], center_col[k], step, h, w);
      const std::span<const double> ccolor(center_color.data() + k * channels, channels);
      for (int r = win.row_begin; r < win.row_end; ++r) {
        for (int c = win.col_begin; c < win.col_end; ++c) {
          const std::size_t i = labels.index(r, c);
          const double dr = r - center_row[k], dc = c - center_col[k];
          const double d = squared_distance(space.pixel(i), ccolor) + (dr * dr + dc * dc) * spatial_weight;
          if (d < dist[i]) {
            dist[i] = d;
            labels[i] = static_cast<RegionId>(k);
          }
        }
      }
    }
    std::fill(sum_row.begin(), sum_row.end(), 0.0);
    std::fill(sum_col.begin(), sum_col.end(), 0.0);
    std::fill(sum_color.begin(), sum_color.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = labels.index(r, c);
        const auto k = static_cast<std::size_t>(labels[i]);
        sum_row[k] += r;
        sum_col[k] += c;
        const auto px = space.pixel(i);
        for (std::size_t ch = 0; ch < channels; ++ch) sum_color[k * channels + ch] += px[ch];
        ++count[k];
      }
    }
    for (std::size_t k = 0; k < centers; ++k) {
      if (count[k] == 0) continue;
      const auto n = static_cast<double>(count[k]);
      center_row[k] = sum_row[k] / n;
      center_col[k] = sum_col[k] / n;
      for (std::size_t ch = 0; ch < channels; ++ch) center_color[k * channels + ch] = sum_color[k * channels + ch] / n;
    }
  }
  return enforce_connectivity(labels, fragment_threshold(p.min_region_fraction, step));
}

std::vector<double> lsc_embedding(std::span<const float> color, double row, double col, const SeedGrid& grid,
                                  double ratio) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  std::vector<double> phi;
  phi.reserve(2 * color.size() + 4);
  for (float v : color) {
    phi.push_back(std::cos(kHalfPi * v));
    phi.push_back(std::sin(kHalfPi * v));
  }
  const double theta_r = kHalfPi * row / grid.step_row;
  const double theta_c = kHalfPi * col / grid.step_col;
  phi.push_back(ratio * std::cos(theta_r));
  phi.push_back(ratio * std::sin(theta_r));
  phi.push_back(ratio * std::cos(theta_c));
  phi.push_back(ratio * std::sin(theta_c));
  return phi;
}

Segmentation lsc(const RasterImage& img, const LscParams& p) {
  p.validate();
  require_k(p.k, img);
  const int h = img.height(), w = img.width();
  const std::size_t n = img.pixel_count();
  const double step = std::sqrt(static_cast<double>(n) / p.k);
  const SeedGrid grid = seed_grid(h, w, p.k);
  const std::size_t dims = 2 * static_cast<std::size_t>(img.channels()) + 4;

  // phi(p) for every pixel, and the kernel weight w(p) = phi(p) . mean(phi).
  std::vector<double> phi(n * dims);
  std::vector<double> mean_phi(dims, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c);
      const auto e = lsc_embedding(img.pixel(i), r, c, grid, p.ratio);
      std::copy(e.begin(), e.end(), phi.begin() + static_cast<std::ptrdiff_t>(i * dims));
      for (std::size_t d = 0; d < dims; ++d) mean_phi[d] += e[d];
    }
  }
  for (double& v : mean_phi) v /= static_cast<double>(n);
  std::vector<double> weight(n);
  std::vector<double> normalized(n * dims);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> e(phi.data() + i * dims, dims);
    double wdot = 0.0, norm2 = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      wdot += e[d] * mean_phi[d];
      norm2 += e[d] * e[d];
    }
    weight[i] = std::max(wdot, 1e-6 * norm2);
    for (std::size_t d = 0; d < dims; ++d) normalized[i * dims + d] = e[d] / weight[i];
  }

  const std::size_t centers = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
  std::vector<double> center_row(centers), center_col(centers), center_feat(centers * dims);
  for (int gr = 0; gr < grid.rows; ++gr) {
    for (int gc = 0; gc < grid.cols; ++gc) {
      const std::size_t k = static_cast<std::size_t>(gr * grid.cols + gc);
      const double row = (gr + 0.5) * grid.step_row - 0.5;
      const double col = (gc + 0.5) * grid.step_col - 0.5;
      center_row[k] = row;
      center_col[k] = col;
      const int rr = std::clamp(static_cast<int>(std::lround(row)), 0, h - 1);
      const int cc = std::clamp(static_cast<int>(std::lround(col)), 0, w - 1);
      const std::size_t i = static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) + static_cast<std::size_t>(cc);
      const auto e = lsc_embedding(img.pixel(i), row, col, grid, p.ratio);
      double wdot = 0.0, norm2 = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        wdot += e[d] * mean_phi[d];
        norm2 += e[d] * e[d];
      }
      const double wk = std::max(wdot, 1e-6 * norm2);
      for (std::size_t d = 0; d < dims; ++d) center_feat[k * dims + d] = e[d] / wk;
    }
  }

  Grid<RegionId> labels = grid_labels(h, w, grid);
  std::vector<double> dist(n);
  std::vector<double> sum_w(centers), sum_row(centers), sum_col(centers), sum_phi(centers * dims);
  for (int iter = 0; iter < p.max_iters; ++iter) {
    std::fill(dist.begin(), dist.end(), kInf);
    for (std::size_t k = 0; k < centers; ++k) {
      const Window win = window_around(center_row[k], center_col[k], step, h, w);
      const std::span<const double> center(center_feat.data() + k * dims, dims);
      for (int r = win.row_begin; r < win.row_end; ++r) {
        for (int c = win.col_begin; c < win.col_end; ++c) {
          const std::size_t i = labels.index(r, c);
          const double d = squared_distance({normalized.data() + i * dims, dims}, center);
          if (d < dist[i]) {
            dist[i] = d;
            labels[i] = static_cast<RegionId>(k);
          }
        }
      }
    }
    // Weighted means: m_k = sum(w * phi/w) / sum(w) = sum(phi) / sum(w).
    std::fill(sum_w.begin(), sum_w.end(), 0.0);
    std::fill(sum_row.begin(), sum_row.end(), 0.0);
    std::fill(sum_col.begin(), sum_col.end(), 0.0);
    std::fill(sum_phi.begin(), sum_phi.end(), 0.0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = labels.index(r, c);
        const auto k = static_cast<std::size_t>(labels[i]);
        sum_w[k] += weight[i];
        sum_row[k] += weight[i] * r;
        sum_col[k] += weight[i] * c;
        for (std::size_t d = 0; d < dims; ++d) sum_phi[k * dims + d] += phi[i * dims + d];
      }
    }
    for (std::size_t k = 0; k < centers; ++k) {
      if (sum_w[k] <= 0.0) continue;
      center_row[k] = sum_row[k] / sum_w[k];
      center_col[k] = sum_col[k] / sum_w[k];
      for (std::size_t d = 0; d < dims; ++d) center_feat[k * dims + d] = sum_phi[k * dims + d] / sum_w[k];
    }
  }
  return enforce_connectivity(labels, fragment_threshold(p.min_region_fraction, step));
}

QuickshiftForest quickshift_forest(const RasterImage& img, const QuickshiftParams& p) {
  p.validate();
  const int h = img.height(), w = img.width();
  const std::size_t n = img.pixel_count();
  const ChannelImage space = clustering_space(img);
  const double inv_two_sigma2 = 1.0 / (2.0 * p.kernel_size * p.kernel_size);
  const int radius = static_cast<int>(std::ceil(3.0 * p.kernel_size));
  const double ratio2 = p.color_ratio * p.color_ratio;

  auto joint_distance = [&](std::size_t i, std::size_t j, int dr, int dc) {
    return ratio2 * squared_distance(space.pixel(i), space.pixel(j)) + static_cast<double>(dr * dr + dc * dc);
  };

  QuickshiftForest forest;
  forest.density.assign(n, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c);
      double e = 0.0;
      for (int rr = std::max(0, r - radius); rr <= std::min(h - 1, r + radius); ++rr) {
        for (int cc = std::max(0, c - radius); cc <= std::min(w - 1, c + radius); ++cc) {
          const std::size_t j = static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) + static_cast<std::size_t>(cc);
          e += std::exp(-joint_distance(i, j, rr - r, cc - c) * inv_two_sigma2);
        }
      }
      forest.density[i] = e;
    }
  }

  // Total order on pixels: higher density first, earlier pixel on ties.
  auto higher = [&](std::size_t a, std::size_t b) {
    return forest.density[a] > forest.density[b] || (forest.density[a] == forest.density[b] && a < b);
  };
  const int reach = static_cast<int>(std::floor(p.max_dist));
  const double tau2 = p.max_dist * p.max_dist;
  forest.parent.resize(n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c);
      std::size_t best = i;
      double best_d = kInf;
      for (int rr = std::max(0, r - reach); rr <= std::min(h - 1, r + reach); ++rr) {
        for (int cc = std::max(0, c - reach); cc <= std::min(w - 1, c + reach); ++cc) {
          const int dr = rr - r, dc = cc - c;
          if (dr * dr + dc * dc > tau2) continue;
          const std::size_t j = static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) + static_cast<std::size_t>(cc);
          if (!higher(j, i)) continue;
          const double d = joint_distance(i, j, dr, dc);
          if (d < best_d) {
            best_d = d;
            best = j;
          }
        }
      }
      forest.parent[i] = static_cast<std::int64_t>(best);
    }
  }

  // Parents always rank higher, so resolving in descending order visits
  // every parent before its children.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), higher);
  Grid<RegionId> roots(h, w);
  for (std::size_t i : order) {
    const auto parent = static_cast<std::size_t>(forest.parent[i]);
    roots[i] = parent == i ? static_cast<RegionId>(i) : roots[parent];
  }
  forest.segmentation = relabel_contiguous(roots);
  return forest;
}

Segmentation quickshift(const RasterImage& img, const QuickshiftParams& p) {
  return quickshift_forest(img, p).segmentation;
}

Segmentation sliding_window(int height, int width, int window, int stride) {
  if (height < 1 || width < 1) throw std::invalid_argument("sliding window: empty image");
  if (stride < 1 || stride > window || window > std::min(height, width))
    throw std::invalid_argument("sliding window needs 1 <= stride <= window <= min(height, width)");
  Grid<RegionId> ids(height, width);
  if (stride == window) {
    const int rows = height / window, cols = width / window;
    for (int r = 0; r < height; ++r) {
      const int tr = std::min(rows - 1, r / window);
      for (int c = 0; c < width; ++c) ids(r, c) = tr * cols + std::min(cols - 1, c / window);
    }
    return Segmentation(std::move(ids), rows * cols);
  }
  // Window starts along one axis; the final window is flush with the border.
  auto starts = [window, stride](int extent) {
    std::vector<int> s;
    for (int x = 0; x + window <= extent; x += stride) s.push_back(x);
    if (s.back() + window < extent) s.push_back(extent - window);
    return s;
  };
  // Nearest center per axis; the squared distance is separable, and taking
  // the first minimum per axis yields the smallest row-major window index.
  auto nearest = [window](const std::vector<int>& s, int x) {
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = std::abs(x - (s[i] + (window - 1) / 2.0));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return static_cast<int>(best);
  };
  const auto row_starts = starts(height), col_starts = starts(width);
  const int cols = static_cast<int>(col_starts.size());
  std::vector<int> col_index(static_cast<std::size_t>(width));
  for (int c = 0; c < width; ++c) col_index[static_cast<std::size_t>(c)] = nearest(col_starts, c);
  for (int r = 0; r < height; ++r) {
    const int wr = nearest(row_starts, r);
    for (int c = 0; c < width; ++c) ids(r, c) = wr * cols + col_index[static_cast<std::size_t>(c)];
  }
  return relabel_contiguous(ids);
}

Segmentation enforce_connectivity(const Grid<RegionId>& labels, std::int64_t min_size) {
  const Segmentation comps = connected_components(labels);
  const auto n = static_cast<std::size_t>(comps.region_count());
  std::vector<std::int64_t> size(n, 0);
  for (RegionId id : comps.ids().cells()) ++size[static_cast<std::size_t>(id)];

  std::vector<std::vector<std::size_t>> neighbors(n);
  const int h = labels.height(), w = labels.width();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto a = static_cast<std::size_t>(comps(r, c));
      if (c + 1 < w) {
        const auto b = static_cast<std::size_t>(comps(r, c + 1));
        if (a != b) {
          neighbors[a].push_back(b);
          neighbors[b].push_back(a);
        }
      }
      if (r + 1 < h) {
        const auto b = static_cast<std::size_t>(comps(r + 1, c));
        if (a != b) {
          neighbors[a].push_back(b);
          neighbors[b].push_back(a);
        }
      }
    }
  }
  for (auto& nb : neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  // Union-find keyed by the smallest component index of each group.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t comp = 0; comp < n; ++comp) {
      const std::size_t root = find(comp);
      if (root != comp || size[root] >= min_size) continue;
      std::size_t target = root;
      std::int64_t target_size = -1;
      for (std::size_t nb : neighbors[root]) {
        const std::size_t other = find(nb);
        if (other == root) continue;
        if (size[other] > target_size || (size[other] == target_size && other < target)) {
          target = other;
          target_size = size[other];
        }
      }
      if (target == root) continue;
      const std::size_t keep = std::min(root, target), drop = std::max(root, target);
      parent[drop] = keep;
      size[keep] += size[drop];
      auto& into = neighbors[keep];
      into.insert(into.end(), neighbors[drop].begin(), neighbors[drop].end());
      neighbors[drop].clear();
      std::sort(into.begin(), into.end());
      into.erase(std::unique(into.begin(), into.end()), into.end());
      changed = true;
    }
  }

  Grid<RegionId> merged(h, w);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    merged[i] = static_cast<RegionId>(find(static_cast<std::size_t>(comps[i])));
  }
  return relabel_contiguous(merged);
}

std::int64_t boundary_length(const Segmentation& seg) {
  std::int64_t edges = 0;
  for (int r = 0; r < seg.height(); ++r) {
    for (int c = 0; c < seg.width(); ++c) {
      if (c + 1 < seg.width() && seg(r, c) != seg(r, c + 1)) ++edges;
      if (r + 1 < seg.height() && seg(r, c) != seg(r + 1, c)) ++edges;
    }
  }
  return edges;
}

}  // namespace segclass
