#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsc/classifier.hpp"
#include "tsc/trees.hpp"

namespace tsc {

struct IntervalStats {
  double mean = 0.0;
  double stdev = 0.0;  // population
  double slope = 0.0;  // least squares against the index
};

/// Statistics over the closed, 0-based interval [start, end]. Throws
/// RangeError unless start < end < series length.
IntervalStats interval_stats(std::span<const double> series, std::size_t start, std::size_t end);

struct Interval {
  std::size_t start = 0, end = 0;  // closed
};

struct TsfOptions {
  std::size_t trees = 500;
  std::size_t min_length = 3;  // p: intervals span at least p + 1 points
  std::uint64_t seed = 0;
};

/// Time series forest: every tree sees floor(sqrt m) random intervals
/// summarised by mean, sd and slope. Majority vote, ties to the lower class.
class TimeSeriesForest : public Classifier {
 public:
  explicit TimeSeriesForest(TsfOptions options = {}) : options_(options) {}
  std::string name() const override { return "tsf"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  std::string selected_params() const override { return "trees=" + std::to_string(trees_.size()); }

  std::size_t tree_count() const noexcept { return trees_.size(); }
  const std::vector<Interval>& intervals(std::size_t tree) const { return intervals_.at(tree); }
  const RandomTree& tree(std::size_t t) const { return trees_.at(t); }
  /// The 3 floor(sqrt m) features tree t sees for a series.
  std::vector<double> features(std::size_t tree, std::span<const double> series) const;

 private:
  TsfOptions options_;
  int class_count_ = 0;
  std::vector<RandomTree> trees_;
  std::vector<std::vector<Interval>> intervals_;
};

/// Subseries layout shared by every series for one setting of z.
struct TsbfLayout {
  std::size_t intervals = 0;     // v = floor(z m / a)
  std::size_t min_length = 0;    // e = v a
  std::size_t subseries = 0;     // w = floor(m / a) - v
};

/// Throws ParameterError naming z when the derived w < 1.
TsbfLayout tsbf_layout(std::size_t m, double z, std::size_t a);

struct TsbfOptions {
  std::vector<double> z_grid{0.1, 0.25, 0.5, 0.75};
  std::size_t min_interval = 5;  // a
  std::size_t bins = 10;         // b
  IncrementalPolicy forest{};
  std::uint64_t seed = 0;
};

/// Time series bag of features. Subseries cases are classified by a first
/// forest; binned out-of-bag probabilities form per-series histograms for a
/// second forest. z is chosen by the second forest's OOB error.
class TimeSeriesBagOfFeatures : public Classifier {
 public:
  struct Subseries {
    std::size_t start = 0, length = 0;
  };

  explicit TimeSeriesBagOfFeatures(TsbfOptions options = {}) : options_(options) {}
  std::string name() const override { return "tsbf"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return 1.0 - oob_error_; }
  std::string selected_params() const override;

  double z() const noexcept { return z_; }
  const TsbfLayout& layout() const noexcept { return layout_; }
  const std::vector<Subseries>& subseries() const noexcept { return subseries_; }
  /// One row per subseries: 3 statistics per interval then 3 for the whole
  /// subseries.
  FeatureMatrix subseries_features(std::span<const double> series) const;
  /// b (c - 1) bin counts followed by c predicted-class frequencies.
  std::vector<double> histogram(const FeatureMatrix& probabilities) const;
  /// Stage-one training table for the selected z: n w rows.
  const TabularDataset& subseries_table() const noexcept { return stage_one_; }
  const RandomForest& subseries_forest() const noexcept { return first_; }
  const TabularDataset& histogram_table() const noexcept { return stage_two_; }

 private:
  TsbfOptions options_;
  int class_count_ = 0;
  double z_ = 0.0;
  double oob_error_ = 1.0;
  TsbfLayout layout_;
  std::vector<Subseries> subseries_;
  TabularDataset stage_one_, stage_two_;
  RandomForest first_, second_;
};

struct LpsOptions {
  std::size_t subseries = 20;  // w
  std::vector<std::size_t> depths{2, 4, 6};
  std::size_t trees = 200;
  std::uint64_t seed = 0;
};

/// Learned pattern similarity. Regression trees over stacked raw and
/// differenced segments; series are represented by per-leaf row counts and
/// classified by 1-NN on those counts. Depth is chosen by LOOCV.
class LearnedPatternSimilarity : public Classifier {
 public:
  struct Tree {
    std::size_t length = 0;
    std::vector<std::size_t> raw_starts, diff_starts;
    RegressionTree tree;
    std::size_t offset = 0;  // first column in the count vector
  };

  explicit LearnedPatternSimilarity(LpsOptions options = {}) : options_(options) {}
  std::string name() const override { return "lps"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override { return "d=" + std::to_string(depth_); }

  /// Concatenated leaf counts for one series.
  std::vector<double> counts(std::span<const double> series) const;
  const std::vector<std::vector<double>>& train_counts() const noexcept { return train_counts_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }
  std::size_t depth() const noexcept { return depth_; }

  /// Builds the forest for one depth without selection.
  void fit_depth(const Dataset& train, std::size_t depth);

 private:
  LpsOptions options_;
  int class_count_ = 0;
  std::size_t depth_ = 0;
  double train_accuracy_ = 0.0;
  std::vector<Tree> trees_;
  std::size_t width_ = 0;
  std::vector<std::vector<double>> train_counts_;
  std::vector<int> labels_;
};

}  // namespace tsc
