#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsc/rng.hpp"
#include "tsc/tabular.hpp"

namespace tsc {

struct TreeOptions {
  /// Attributes sampled per node; 0 means floor(log2 f) + 1.
  std::size_t attributes_per_node = 0;
  /// 0 means unlimited.
  std::size_t max_depth = 0;
  /// Keep the sampled attribute list on every split node (for inspection).
  bool record_candidates = false;
};

/// Unpruned classification tree. At each node a random attribute order is
/// drawn; attributes are evaluated in that order until K have been tried
/// and at least one gave positive information gain. Every midpoint between
/// distinct sorted values is a candidate threshold; rows with
/// value <= threshold go left.
class RandomTree {
 public:
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double gain = 0.0;
    std::size_t dist = 0;  // offset of the leaf distribution
    std::vector<int> candidates;
  };

  /// rows may repeat (bootstrap). Throws InputError when rows is empty.
  void fit(const TabularDataset& data, std::span<const std::size_t> rows, const TreeOptions& options,
           Rng& rng);
  void fit(const TabularDataset& data, const TreeOptions& options, std::uint64_t seed);

  std::span<const double> distribution(std::span<const double> row) const;
  int predict(std::span<const double> row) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const;
  std::size_t depth() const noexcept { return depth_; }
  int class_count() const noexcept { return class_count_; }

 private:
  std::vector<Node> nodes_;
  std::vector<double> dists_;
  int class_count_ = 0;
  std::size_t depth_ = 0;
};

struct ForestOptions {
  std::size_t trees = 500;
  TreeOptions tree;
  std::uint64_t seed = 0;
};

/// Growth in blocks of `step` trees while out-of-bag error keeps falling.
struct IncrementalPolicy {
  std::size_t step = 50;
  std::size_t max_trees = 1000;
};

/// Bagged random trees. Tree t draws its bootstrap sample and attribute
/// choices from Rng(seed + t); trees are combined in index order.
class RandomForest : public TabularClassifier {
 public:
  explicit RandomForest(ForestOptions options = {}) : options_(options) {}

  std::string name() const override { return "randf"; }
  void fit(const TabularDataset& data) override;
  /// Adds trees in blocks until a block fails to lower OOB error or the
  /// cap is reached.
  void fit_incremental(const TabularDataset& data, const IncrementalPolicy& policy);
  std::vector<double> distribution(std::span<const double> row) const override;

  std::size_t tree_count() const noexcept { return trees_.size(); }
  const RandomTree& tree(std::size_t t) const { return trees_[t]; }

  /// Mean distribution over trees for which row i was out of bag. Rows that
  /// were in every bootstrap get the uniform distribution and are flagged.
  std::vector<double> oob_distribution(std::size_t i) const;
  bool oob_missing(std::size_t i) const { return oob_votes_[i] == 0; }
  /// Error over rows with at least one OOB tree; NaN if there are none.
  double oob_error() const;
  const std::vector<double>& oob_error_history() const noexcept { return history_; }

 private:
  void grow(const TabularDataset& data, std::size_t count);

  ForestOptions options_;
  int class_count_ = 0;
  std::vector<RandomTree> trees_;
  std::vector<double> oob_sum_;
  std::vector<std::size_t> oob_votes_;
  std::vector<int> labels_;
  std::vector<double> history_;
};

/// Regression tree choosing one random attribute per level, shared by all
/// nodes at that level; each node splits at the variance-minimising
/// midpoint of that attribute. Leaves are numbered 0..leaf_count()-1.
class RegressionTree {
 public:
  void fit(const FeatureMatrix& x, std::span<const double> targets, std::size_t max_depth, Rng& rng,
           std::size_t min_split = 2);

  std::size_t leaf_index(std::span<const double> row) const;
  std::size_t leaf_count() const noexcept { return leaf_count_; }
  double leaf_value(std::size_t leaf) const { return leaf_values_[leaf]; }

 private:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::size_t leaf = 0;
  };
  std::vector<Node> nodes_;
  std::vector<double> leaf_values_;
  std::size_t leaf_count_ = 0;
};

}  // namespace tsc
