#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tsc {

/// Dense row-major feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  /// Appends a row; the first row fixes the width. Throws SizeError on mismatch.
  void push_row(std::span<const double> values);
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Classification table: rows of features with dense class ids.
struct TabularDataset {
  FeatureMatrix x;
  std::vector<int> y;
  int class_count = 0;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t width() const noexcept { return x.cols(); }
  TabularDataset subset(std::span<const std::size_t> rows) const;
  /// Throws SizeError if rows and labels disagree, InputError on bad labels.
  void validate() const;
};

/// A classifier over fixed-width feature vectors.
class TabularClassifier {
 public:
  virtual ~TabularClassifier() = default;
  virtual std::string name() const = 0;
  virtual void fit(const TabularDataset& data) = 0;
  virtual std::vector<double> distribution(std::span<const double> row) const = 0;
  virtual int predict(std::span<const double> row) const;
};

using TabularFactory = std::function<std::unique_ptr<TabularClassifier>()>;

/// Stratified assignment of rows to k folds (fold ids 0..k-1). Each class's
/// rows are shuffled and dealt round robin, continuing across classes.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

/// k-fold cross-validated accuracy of freshly built models; k is reduced to
/// n when there are fewer rows than folds.
double cross_validate(const TabularFactory& factory, const TabularDataset& data, int k,
                      std::uint64_t seed);

/// Per-feature mean/sd standardisation fitted on training rows; constant
/// features are centred only.
class Standardizer {
 public:
  void fit(const FeatureMatrix& x);
  std::vector<double> apply(std::span<const double> row) const;
  FeatureMatrix apply(const FeatureMatrix& x) const;

 private:
  std::vector<double> mean_, scale_;
};

}  // namespace tsc
