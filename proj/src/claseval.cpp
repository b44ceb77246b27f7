#include "segclass/claseval.hpp"

#include <cstdio>
#include <stdexcept>

namespace segclass {
namespace {

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("confusion matrix is empty (no labeled ground-truth pixels)");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
  if (num_classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(ClassId truth, ClassId pred, std::int64_t n) {
  if (truth < 0 || truth >= num_classes_ || pred < 0 || pred >= num_classes_)
    throw std::invalid_argument("class pair (" + std::to_string(truth) + ", " + std::to_string(pred) +
                                ") outside [0, " + std::to_string(num_classes_) + ")");
  if (n < 0) throw std::invalid_argument("negative confusion count");
  counts_[index(truth, pred)] += n;
  total_ += n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) throw std::invalid_argument("confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

std::int64_t ConfusionMatrix::row_sum(ClassId truth) const {
  std::int64_t s = 0;
  for (ClassId p = 0; p < num_classes_; ++p) s += (*this)(truth, p);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(ClassId pred) const {
  std::int64_t s = 0;
  for (ClassId t = 0; t < num_classes_; ++t) s += (*this)(t, pred);
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (ClassId c = 0; c < num_classes_; ++c) s += (*this)(c, c);
  return s;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int num_classes) {
  if (!pred.same_shape(gt)) throw std::invalid_argument("prediction and ground truth differ in size");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kUnlabeled) continue;
    cm.add(gt[i], pred[i]);
  }
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double cohen_kappa(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  const auto total = static_cast<double>(cm.total());
  const double p_o = static_cast<double>(cm.trace()) / total;
  double p_e = 0.0;
  for (ClassId c = 0; c < cm.num_classes(); ++c) {
    p_e += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  }
  p_e /= total * total;
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

std::optional<double> f1_score(const ConfusionMatrix& cm, ClassId class_id) {
  require_nonempty(cm);
  if (class_id < 0 || class_id >= cm.num_classes()) return std::nullopt;
  const std::int64_t tp = cm(class_id, class_id);
  const std::int64_t fn = cm.row_sum(class_id) - tp;
  const std::int64_t fp = cm.col_sum(class_id) - tp;
  if (tp + fn + fp == 0) return std::nullopt;
  if (tp == 0) return 0.0;
  // 2pr/(p+r) with p = tp/(tp+fp), r = tp/(tp+fn) reduces to 2tp/(2tp+fp+fn).
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

void write_classif_csv(std::ostream& out, const std::vector<ClassifRow>& rows) {
  out << kClassifHeader << '\n';
  char buf[128];
  for (const auto& row : rows) {
    out << row.algorithm << ',' << row.regions << ',';
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * row.accuracy);
    out << buf << ',';
    if (row.f1_car) {
      std::snprintf(buf, sizeof buf, "%.4f", *row.f1_car);
      out << buf;
    } else {
      out << "n/a";
    }
    std::snprintf(buf, sizeof buf, "%.4f", row.kappa);
    out << ',' << buf << '\n';
  }
}

}  // namespace segclass
