#pragma once

// One-vs-rest linear SVM trained by SGD on standardized region samples.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "segclass/features.hpp"
#include "segclass/raster.hpp"

namespace segclass {

struct TrainConfig {
  double lambda = 1e-4;
  int epochs = 20;
  double eta0 = 1.0;
  std::uint64_t seed = 0;
  void validate() const;
};

class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(int num_classes, int dim);

  int num_classes() const noexcept { return num_classes_; }
  int dim() const noexcept { return dim_; }

  std::span<double> weights(int cls) { return {weights_.data() + offset(cls), static_cast<std::size_t>(dim_)}; }
  std::span<const double> weights(int cls) const {
    return {weights_.data() + offset(cls), static_cast<std::size_t>(dim_)};
  }
  double& bias(int cls) { return biases_[static_cast<std::size_t>(cls)]; }
  double bias(int cls) const { return biases_[static_cast<std::size_t>(cls)]; }
  std::span<double> mean() noexcept { return mean_; }
  std::span<const double> mean() const noexcept { return mean_; }
  /// Per-dimension scale; kept > 0 (zero-variance dims use 1).
  std::span<double> scale() noexcept { return scale_; }
  std::span<const double> scale() const noexcept { return scale_; }

  /// w_c . standardize(sample) + b_c for every class.
  std::vector<double> scores(std::span<const double> sample) const;

  bool operator==(const LinearModel&) const = default;

 private:
  std::size_t offset(int cls) const {
    return static_cast<std::size_t>(cls) * static_cast<std::size_t>(dim_);
  }

  int num_classes_ = 0;
  int dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> biases_;
  std::vector<double> mean_;
  std::vector<double> scale_;
};

struct TrainResult {
  LinearModel model;
  /// Regularized one-vs-rest hinge objective on the standardized training
  /// set, evaluated after each epoch.
  std::vector<double> epoch_objective;
};

/// Samples labeled kUnlabeled are skipped. num_classes == 0 infers
/// max(label) + 1. Throws std::invalid_argument with fewer than two distinct
/// classes or when labels and samples disagree in count.
TrainResult train_svm_traced(const FeatureSet& samples, std::span<const ClassId> labels, const TrainConfig& cfg,
                             int num_classes = 0);
LinearModel train_svm(const FeatureSet& samples, std::span<const ClassId> labels, const TrainConfig& cfg,
                      int num_classes = 0);

/// Argmax of the class scores; ties go to the smaller class id.
ClassId predict(const LinearModel& model, std::span<const double> sample);
std::vector<ClassId> predict_all(const LinearModel& model, const FeatureSet& samples);

/// Paints each region with its label.
LabelMap build_semantic_map(const Segmentation& seg, std::span<const ClassId> region_labels);

/// Text format: `linear_model <num_classes> <dim>`, then `mean ...` and
/// `scale ...` rows, then one `class <id> <bias> <w...>` row per class.
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace segclass
