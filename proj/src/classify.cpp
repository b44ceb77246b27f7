#include "segclass/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace segclass {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Weight vector stored as scale * direction so the L2 shrink is O(1).
struct ScaledVector {
  std::vector<double> direction;
  double scale = 1.0;

  explicit ScaledVector(std::size_t dim) : direction(dim, 0.0) {}

  double dot_with(std::span<const double> x) const { return scale * dot(direction, x); }
  void shrink(double factor) {
    scale *= factor;
    if (scale < 1e-9) normalize();
  }
  void add(double step, std::span<const double> x) {
    const double s = step / scale;
    for (std::size_t i = 0; i < x.size(); ++i) direction[i] += s * x[i];
  }
  void normalize() {
    for (double& v : direction) v *= scale;
    scale = 1.0;
  }
  double squared_norm() const { return scale * scale * dot(direction, direction); }
};

}  // namespace

void TrainConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("train: lambda must be > 0");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(eta0 > 0.0)) throw std::invalid_argument("train: eta0 must be > 0");
}

LinearModel::LinearModel(int num_classes, int dim)
    : num_classes_(num_classes), dim_(dim),
      weights_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(dim), 0.0),
      biases_(static_cast<std::size_t>(num_classes), 0.0), mean_(static_cast<std::size_t>(dim), 0.0),
      scale_(static_cast<std::size_t>(dim), 1.0) {
  if (num_classes < 1 || dim < 0) throw std::invalid_argument("linear model needs >= 1 class and dim >= 0");
}

std::vector<double> LinearModel::scores(std::span<const double> sample) const {
  if (static_cast<int>(sample.size()) != dim_)
    throw std::invalid_argument("sample has dimension " + std::to_string(sample.size()) + ", model expects " +
                                std::to_string(dim_));
  std::vector<double> x(sample.size());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = (sample[d] - mean_[d]) / scale_[d];
  std::vector<double> out(static_cast<std::size_t>(num_classes_));
  for (int c = 0; c < num_classes_; ++c) out[static_cast<std::size_t>(c)] = dot(weights(c), x) + bias(c);
  return out;
}

TrainResult train_svm_traced(const FeatureSet& samples, std::span<const ClassId> labels, const TrainConfig& cfg,
                             int num_classes) {
  cfg.validate();
  if (static_cast<int>(labels.size()) != samples.rows())
    throw std::invalid_argument("train: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(samples.rows()) + " samples");
  std::vector<std::size_t> used;
  std::set<ClassId> distinct;
  ClassId max_label = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnlabeled) continue;
    if (labels[i] < 0) throw std::invalid_argument("train: negative class id");
    used.push_back(i);
    distinct.insert(labels[i]);
    max_label = std::max(max_label, labels[i]);
  }
  if (distinct.size() < 2) throw std::invalid_argument("train: need at least two distinct classes");
  if (num_classes == 0) num_classes = max_label + 1;
  if (max_label >= num_classes)
    throw std::invalid_argument("train: label " + std::to_string(max_label) + " exceeds num_classes");

  const int dim = samples.dim();
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = used.size();
  TrainResult result{LinearModel(num_classes, dim), {}};
  LinearModel& model = result.model;

  auto mean = model.mean();
  auto scale = model.scale();
  for (std::size_t i : used) {
    const auto row = samples.row(static_cast<int>(i));
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  }
  for (std::size_t k = 0; k < d; ++k) mean[k] /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t i : used) {
    const auto row = samples.row(static_cast<int>(i));
    for (std::size_t k = 0; k < d; ++k) var[k] += (row[k] - mean[k]) * (row[k] - mean[k]);
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double sd = std::sqrt(var[k] / static_cast<double>(n));
    scale[k] = sd > 0.0 ? sd : 1.0;
  }

  std::vector<double> x(n * d);
  std::vector<ClassId> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = samples.row(static_cast<int>(used[j]));
    for (std::size_t k = 0; k < d; ++k) x[j * d + k] = (row[k] - mean[k]) / scale[k];
    y[j] = labels[used[j]];
  }
  auto sample = [&x, d](std::size_t j) { return std::span<const double>(x.data() + j * d, d); };

  const auto classes = static_cast<std::size_t>(num_classes);
  std::vector<ScaledVector> w(classes, ScaledVector(d));
  std::vector<double> b(classes, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  std::uint64_t t = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j : order) {
      const double eta = cfg.eta0 / (1.0 + cfg.eta0 * cfg.lambda * static_cast<double>(t));
      const auto xj = sample(j);
      for (std::size_t c = 0; c < classes; ++c) {
        const double target = y[j] == static_cast<ClassId>(c) ? 1.0 : -1.0;
        const double margin = target * (w[c].dot_with(xj) + b[c]);
        w[c].shrink(1.0 - eta * cfg.lambda);
        if (margin < 1.0) {
          w[c].add(eta * target, xj);
          b[c] += eta * target;
        }
      }
      ++t;
    }
    double objective = 0.0;
    for (std::size_t c = 0; c < classes; ++c) objective += 0.5 * cfg.lambda * w[c].squared_norm();
    double hinge = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double target = y[j] == static_cast<ClassId>(c) ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - target * (w[c].dot_with(sample(j)) + b[c]));
      }
    }
    result.epoch_objective.push_back(objective + hinge / static_cast<double>(n));
  }

  for (std::size_t c = 0; c < classes; ++c) {
    w[c].normalize();
    std::copy(w[c].direction.begin(), w[c].direction.end(), model.weights(static_cast<int>(c)).begin());
    model.bias(static_cast<int>(c)) = b[c];
  }
  return result;
}

LinearModel train_svm(const FeatureSet& samples, std::span<const ClassId> labels, const TrainConfig& cfg,
                      int num_classes) {
  return train_svm_traced(samples, labels, cfg, num_classes).model;
}

ClassId predict(const LinearModel& model, std::span<const double> sample) {
  const auto s = model.scores(sample);
  ClassId best = 0;
  for (std::size_t c = 1; c < s.size(); ++c) {
    if (s[c] > s[static_cast<std::size_t>(best)]) best = static_cast<ClassId>(c);
  }
  return best;
}

std::vector<ClassId> predict_all(const LinearModel& model, const FeatureSet& samples) {
  std::vector<ClassId> out(static_cast<std::size_t>(samples.rows()));
  for (int i = 0; i < samples.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(model, samples.row(i));
  return out;
}

LabelMap build_semantic_map(const Segmentation& seg, std::span<const ClassId> region_labels) {
  if (static_cast<int>(region_labels.size()) < seg.region_count())
    throw std::invalid_argument("semantic map: " + std::to_string(region_labels.size()) + " labels for " +
                                std::to_string(seg.region_count()) + " regions");
  LabelMap map(seg.height(), seg.width());
  for (std::size_t i = 0; i < seg.size(); ++i) map[i] = region_labels[static_cast<std::size_t>(seg[i])];
  return map;
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ' ' << buf;
  };
  out << "linear_model " << model.num_classes() << ' ' << model.dim() << '\n';
  out << "mean";
  for (double v : model.mean()) put(v);
  out << "\nscale";
  for (double v : model.scale()) put(v);
  out << '\n';
  for (int c = 0; c < model.num_classes(); ++c) {
    out << "class " << c;
    put(model.bias(c));
    for (double v : model.weights(c)) put(v);
    out << '\n';
  }
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model '" + path.string() + "'");
  auto fail = [&path](const std::string& what) { throw FormatError("model '" + path.string() + "': " + what); };
  std::string tag;
  int classes = 0, dim = -1;
  if (!(in >> tag >> classes >> dim) || tag != "linear_model" || classes < 1 || dim < 0) fail("bad header");
  LinearModel model(classes, dim);
  auto read_row = [&](const char* expected, std::span<double> dst) {
    if (!(in >> tag) || tag != expected) fail(std::string("expected `") + expected + "` row");
    for (double& v : dst) {
      if (!(in >> v)) fail(std::string("truncated `") + expected + "` row");
    }
  };
  read_row("mean", model.mean());
  read_row("scale", model.scale());
  for (double s : model.scale()) {
    if (!(s > 0.0)) fail("scale entries must be > 0");
  }
  for (int c = 0; c < classes; ++c) {
    int id = -1;
    if (!(in >> tag >> id) || tag != "class" || id != c) fail("expected `class " + std::to_string(c) + "` row");
    if (!(in >> model.bias(c))) fail("truncated class row");
    for (double& v : model.weights(c)) {
      if (!(in >> v)) fail("truncated class row");
    }
  }
  return model;
}

}  // namespace segclass
