#pragma once

// Pixel-level classification metrics from a confusion matrix. Unlabeled
// ground-truth pixels are skipped entirely.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "segclass/raster.hpp"

namespace segclass {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const noexcept { return num_classes_; }
  std::int64_t total() const noexcept { return total_; }
  std::int64_t operator()(ClassId truth, ClassId pred) const {
    return counts_[index(truth, pred)];
  }
  void add(ClassId truth, ClassId pred, std::int64_t n = 1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::int64_t row_sum(ClassId truth) const;
  std::int64_t col_sum(ClassId pred) const;
  std::int64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(ClassId truth, ClassId pred) const {
    return static_cast<std::size_t>(truth) * static_cast<std::size_t>(num_classes_) + static_cast<std::size_t>(pred);
  }

  int num_classes_ = 0;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Throws std::invalid_argument on size mismatch or labels outside
/// [0, num_classes) (prediction must be labeled wherever gt is).
ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int num_classes);

/// trace / total. Throws std::invalid_argument on an empty matrix.
double overall_accuracy(const ConfusionMatrix& cm);

/// (p_o - p_e) / (1 - p_e); 1 when p_e == 1. Throws on an empty matrix.
double cohen_kappa(const ConfusionMatrix& cm);

/// F1 of one class; std::nullopt when the class occurs in neither the
/// ground truth nor the prediction. Throws on an empty matrix.
std::optional<double> f1_score(const ConfusionMatrix& cm, ClassId class_id);

/// One Table-2 style row.
struct ClassifRow {
  std::string algorithm;
  int regions = 0;
  double accuracy = 0.0;
  std::optional<double> f1_car;
  double kappa = 0.0;
};

inline constexpr const char* kClassifHeader = "algorithm,regions,acc_pct,f1_car,kappa";
void write_classif_csv(std::ostream& out, const std::vector<ClassifRow>& rows);

}  // namespace segclass
