#include "tsc/tabular.hpp"

#include <cmath>

#include "tsc/classifier.hpp"
#include "tsc/error.hpp"
#include "tsc/parallel.hpp"
#include "tsc/rng.hpp"

namespace tsc {

void FeatureMatrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw SizeError("feature row width differs");
  values_.insert(values_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> rows) const {
  TabularDataset out;
  out.x = x.select_rows(rows);
  out.class_count = class_count;
  out.y.reserve(rows.size());
  for (auto r : rows) out.y.push_back(y[r]);
  return out;
}

void TabularDataset::validate() const {
  if (x.rows() != y.size()) throw SizeError("feature rows and labels differ in count");
  if (class_count < 2) throw ParameterError("need at least two classes");
  for (int label : y)
    if (label < 0 || label >= class_count) throw InputError("label out of range");
}

int TabularClassifier::predict(std::span<const double> row) const {
  return argmax(distribution(row));
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 1) throw ParameterError("fold count must be positive");
  int classes = 0;
  for (int l : labels) classes = std::max(classes, l + 1);
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span(members));
    for (auto i : members) fold[i] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  }
  return fold;
}

double cross_validate(const TabularFactory& factory, const TabularDataset& data, int k,
                      std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n < 2) throw InputError("cross-validation needs at least two rows");
  k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), n));
  const auto fold = stratified_folds(data.y, k, seed);
  std::vector<int> predicted(n, -1);
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i)
      (fold[i] == static_cast<int>(f) ? test_rows : train_rows).push_back(i);
    if (test_rows.empty()) return;
    auto model = factory();
    model->fit(data.subset(train_rows));
    for (auto i : test_rows) predicted[i] = model->predict(data.x.row(i));
  });
  return accuracy(predicted, data.y);
}

void Standardizer::fit(const FeatureMatrix& x) {
  const std::size_t n = x.rows(), f = x.cols();
  mean_.assign(f, 0.0);
  scale_.assign(f, 1.0);
  if (n == 0) return;
  for (std::size_t j = 0; j < f; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x.at(i, j);
    const double mu = s / static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (x.at(i, j) - mu) * (x.at(i, j) - mu);
    const double sd = std::sqrt(v / static_cast<double>(n));
    mean_[j] = mu;
    scale_[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean_.size()) throw SizeError("feature row width differs from fitted width");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) * scale_[j];
  return out;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  FeatureMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = apply(x.row(i));
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace tsc
