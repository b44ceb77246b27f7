#pragma once

// Shared fixtures for the unit tests: literal grids, scratch directories and
// random small label maps.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "segclass/raster.hpp"

namespace segtest {

using namespace segclass;

template <typename T = std::int32_t>
Grid<T> grid(std::initializer_list<std::initializer_list<T>> rows) {
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows.begin()->size());
  std::vector<T> cells;
  for (const auto& row : rows) cells.insert(cells.end(), row.begin(), row.end());
  return Grid<T>(h, w, std::move(cells));
}

inline LabelMap labels(std::initializer_list<std::initializer_list<ClassId>> rows) { return grid<ClassId>(rows); }

inline Segmentation segmentation(std::initializer_list<std::initializer_list<RegionId>> rows) {
  return relabel_contiguous(grid<RegionId>(rows));
}

/// The 4x4 fixture used across the metric tests: gt splits columns {0,1} and
/// {2,3}; the segmentation splits columns {0,1,2} and {3}.
inline LabelMap four_by_four_truth() {
  return labels({{0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 1, 1}});
}
inline Segmentation four_by_four_segmentation() {
  return segmentation({{0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}});
}

/// Removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("segclass_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Random fixture: up to max_side x max_side, classes in [0, classes) with
/// some kUnlabeled pixels, regions drawn independently (possibly disconnected).
struct RandomFixture {
  LabelMap gt;
  Segmentation seg;
  int classes = 0;
};

inline RandomFixture random_fixture(std::mt19937_64& rng, int max_side, int max_classes, int max_regions,
                                    double unlabeled_rate = 0.1) {
  std::uniform_int_distribution<int> side(1, max_side);
  const int h = side(rng), w = side(rng);
  const int classes = std::uniform_int_distribution<int>(1, max_classes)(rng);
  const int regions = std::uniform_int_distribution<int>(1, max_regions)(rng);
  std::uniform_int_distribution<int> cls(0, classes - 1), reg(0, regions - 1);
  std::bernoulli_distribution unlabeled(unlabeled_rate);
  RandomFixture f;
  f.classes = classes;
  f.gt = LabelMap(h, w);
  Grid<RegionId> raw(h, w);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    f.gt[i] = unlabeled(rng) ? kUnlabeled : cls(rng);
    raw[i] = reg(rng);
  }
  // Keep at least one labeled pixel so every metric is defined.
  f.gt[0] = cls(rng);
  f.seg = relabel_contiguous(raw);
  return f;
}

}  // namespace segtest
