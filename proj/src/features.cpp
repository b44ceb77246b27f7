#include "segclass/features.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace segclass {

void PatchSpec::validate() const {
  if (scales.empty()) throw std::invalid_argument("patch spec needs at least one scale");
  for (int s : scales) {
    if (s < 1) throw std::invalid_argument("patch scales must be >= 1");
  }
  if (resize_to < 1) throw std::invalid_argument("resize_to must be >= 1");
}

FeatureSet::FeatureSet(int rows, int dim)
    : FeatureSet(rows, dim, std::vector<double>(static_cast<std::size_t>(std::max(rows, 0)) *
                                                    static_cast<std::size_t>(std::max(dim, 0)),
                                                0.0)) {}

FeatureSet::FeatureSet(int rows, int dim, std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (rows < 0 || dim < 0) throw std::invalid_argument("feature set shape must be non-negative");
  if (values_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim))
    throw std::invalid_argument("feature values do not match rows x dim");
}

RasterImage extract_patch(const RasterImage& img, double center_row, double center_col, int side) {
  if (side < 1 || side > std::min(img.height(), img.width()))
    throw std::invalid_argument("patch side " + std::to_string(side) + " does not fit a " +
                                std::to_string(img.height()) + "x" + std::to_string(img.width()) + " image");
  // std::lround rounds halfway cases away from zero.
  const int top = std::clamp(static_cast<int>(std::lround(center_row)) - side / 2, 0, img.height() - side);
  const int left = std::clamp(static_cast<int>(std::lround(center_col)) - side / 2, 0, img.width() - side);
  RasterImage patch(side, side, img.channels());
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const auto src = img.pixel(top + r, left + c);
      for (int ch = 0; ch < img.channels(); ++ch) patch.at(r, c, ch) = src[static_cast<std::size_t>(ch)];
    }
  }
  return patch;
}

RasterImage resize_patch(const RasterImage& patch, int out_side) {
  if (patch.pixel_count() == 0) throw std::invalid_argument("cannot resize an empty patch");
  if (out_side < 1) throw std::invalid_argument("output side must be >= 1");
  if (patch.height() == out_side && patch.width() == out_side) return patch;
  const int channels = patch.channels();
  // Source coordinate of output sample i; a single output sample takes the center.
  auto source = [out_side](int i, int extent) {
    if (out_side == 1) return (extent - 1) / 2.0;
    return static_cast<double>(i) * (extent - 1) / (out_side - 1);
  };
  std::vector<int> c0(static_cast<std::size_t>(out_side)), c1(c0.size());
  std::vector<double> cw(c0.size());
  for (int j = 0; j < out_side; ++j) {
    const double x = source(j, patch.width());
    const auto s = static_cast<std::size_t>(j);
    c0[s] = std::min(static_cast<int>(x), patch.width() - 1);
    c1[s] = std::min(c0[s] + 1, patch.width() - 1);
    cw[s] = x - c0[s];
  }
  RasterImage out(out_side, out_side, channels);
  for (int i = 0; i < out_side; ++i) {
    const double y = source(i, patch.height());
    const int r0 = std::min(static_cast<int>(y), patch.height() - 1);
    const int r1 = std::min(r0 + 1, patch.height() - 1);
    const double rw = y - r0;
    for (int j = 0; j < out_side; ++j) {
      const auto s = static_cast<std::size_t>(j);
      for (int ch = 0; ch < channels; ++ch) {
        const double top = (1.0 - cw[s]) * patch.at(r0, c0[s], ch) + cw[s] * patch.at(r0, c1[s], ch);
        const double bottom = (1.0 - cw[s]) * patch.at(r1, c0[s], ch) + cw[s] * patch.at(r1, c1[s], ch);
        out.at(i, j, ch) = static_cast<float>(std::clamp((1.0 - rw) * top + rw * bottom, 0.0, 1.0));
      }
    }
  }
  return out;
}

std::vector<double> describe_builtin(const RasterImage& patch) {
  constexpr int kBins = 8;
  const int channels = patch.channels();
  const auto n = static_cast<double>(patch.pixel_count());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(channels * kBuiltinValuesPerChannel));
  for (int ch = 0; ch < channels; ++ch) {
    double sum = 0.0;
    std::array<double, kBins> hist{};
    for (std::size_t i = 0; i < patch.pixel_count(); ++i) {
      const double v = patch.pixel(i)[static_cast<std::size_t>(ch)];
      sum += v;
      hist[static_cast<std::size_t>(std::min(kBins - 1, static_cast<int>(v * kBins)))] += 1.0;
    }
    const double mean = sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < patch.pixel_count(); ++i) {
      const double d = patch.pixel(i)[static_cast<std::size_t>(ch)] - mean;
      var += d * d;
    }
    out.push_back(mean);
    out.push_back(std::sqrt(var / n));
    for (double h : hist) out.push_back(h / n);
  }
  return out;
}

FeatureSet build_samples(const RasterImage& img, const Segmentation& seg, const PatchSpec& spec,
                         const Descriptor& descriptor) {
  if (img.height() != seg.height() || img.width() != seg.width())
    throw std::invalid_argument("image and segmentation differ in size");
  if (descriptor.kind == DescriptorKind::kExternalFile) {
    return features_for_regions(load_external_features(descriptor.external_path), seg.region_count());
  }
  spec.validate();
  std::vector<int> scales = spec.scales;
  std::sort(scales.begin(), scales.end());
  const RegionStats stats = region_stats(seg);
  const int block = img.channels() * kBuiltinValuesPerChannel;
  const int dim = block * static_cast<int>(scales.size());
  FeatureSet samples(seg.region_count(), dim);
  for (int region = 0; region < seg.region_count(); ++region) {
    const auto& info = stats[static_cast<std::size_t>(region)];
    auto row = samples.row(region);
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const RasterImage patch =
          resize_patch(extract_patch(img, info.centroid_row, info.centroid_col, scales[s]), spec.resize_to);
      const auto values = describe_builtin(patch);
      std::copy(values.begin(), values.end(), row.begin() + static_cast<std::ptrdiff_t>(s) * block);
    }
  }
  return samples;
}

std::map<RegionId, std::vector<double>> load_external_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open feature file '" + path.string() + "'");
  std::map<RegionId, std::vector<double>> vectors;
  std::size_t dim = 0;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      std::string f = line.substr(start, end - start);
      const auto b = f.find_first_not_of(" \t\r");
      const auto e = f.find_last_not_of(" \t\r");
      fields.push_back(b == std::string::npos ? std::string{} : f.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() < 2) fail("expected `region_id, v1, ..., vd`");
    RegionId id = 0;
    {
      const auto& f = fields[0];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), id);
      if (ec != std::errc{} || ptr != f.data() + f.size() || id < 0) fail("bad region id '" + f + "'");
    }
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto& f = fields[k];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v))
        fail("bad value '" + f + "'");
      values.push_back(v);
    }
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      fail("dimension " + std::to_string(values.size()) + " differs from earlier rows (" + std::to_string(dim) + ")");
    }
    if (!vectors.emplace(id, std::move(values)).second) fail("duplicate region id " + std::to_string(id));
  }
  if (vectors.empty()) throw FormatError("feature file '" + path.string() + "' holds no vectors");
  return vectors;
}

FeatureSet features_for_regions(const std::map<RegionId, std::vector<double>>& vectors, int region_count) {
  if (vectors.empty()) throw std::invalid_argument("no feature vectors");
  const int dim = static_cast<int>(vectors.begin()->second.size());
  FeatureSet out(region_count, dim);
  for (RegionId id = 0; id < region_count; ++id) {
    const auto it = vectors.find(id);
    if (it == vectors.end()) throw std::invalid_argument("no feature vector for region " + std::to_string(id));
    if (static_cast<int>(it->second.size()) != dim)
      throw std::invalid_argument("feature vector of region " + std::to_string(id) + " has the wrong dimension");
    std::copy(it->second.begin(), it->second.end(), out.row(id).begin());
  }
  if (vectors.rbegin()->first >= region_count)
    throw std::invalid_argument("feature vector for region " + std::to_string(vectors.rbegin()->first) +
                                " but the segmentation has " + std::to_string(region_count) + " regions");
  return out;
}

void save_features(const FeatureSet& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  char buf[32];
  for (int r = 0; r < features.rows(); ++r) {
    out << r;
    for (double v : features.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ", " << buf;
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

}  // namespace segclass
