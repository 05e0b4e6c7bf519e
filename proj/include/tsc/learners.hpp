#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsc/tabular.hpp"

namespace tsc {

/// Gaussian naive Bayes. Per-class variances are floored at 1e-6.
class NaiveBayes : public TabularClassifier {
 public:
  std::string name() const override { return "nb"; }
  void fit(const TabularDataset& data) override;
  std::vector<double> distribution(std::span<const double> row) const override;

 private:
  int class_count_ = 0;
  std::size_t width_ = 0;
  std::vector<double> log_prior_;
  std::vector<double> mean_, var_;  // class-major
};

struct SvmOptions {
  int degree = 1;
  double c = 1.0;
  double tolerance = 1e-3;
  std::size_t max_iterations = 200000;
};

/// Two-class soft-margin SVM solved by sequential minimal optimisation with
/// second-order working-set selection. Kernel (x.y + 1)^degree on
/// standardised inputs. Labels are +1 / -1.
class BinarySvm {
 public:
  void fit(const FeatureMatrix& x, std::span<const int> sign, const SvmOptions& options);
  double decision(std::span<const double> standardized_row) const;

  std::span<const double> alpha() const noexcept { return alpha_; }
  double bias() const noexcept { return rho_; }
  std::size_t iterations() const noexcept { return iterations_; }
  bool converged() const noexcept { return converged_; }
  /// Dual objective after every update (maximisation form).
  const std::vector<double>& objective_history() const noexcept { return history_; }

 private:
  SvmOptions options_;
  FeatureMatrix support_;
  std::vector<double> coef_;  // alpha_i * y_i for the support rows
  std::vector<double> alpha_;
  double rho_ = 0.0;
  std::size_t iterations_ = 0;
  bool converged_ = false;
  std::vector<double> history_;
};

double polynomial_kernel(std::span<const double> a, std::span<const double> b, int degree);

/// Polynomial-kernel SVM; one-vs-one majority vote for more than two
/// classes, ties towards the lower class id.
class PolynomialSvm : public TabularClassifier {
 public:
  explicit PolynomialSvm(SvmOptions options = {}) : options_(options) {}
  std::string name() const override { return "svm" + std::to_string(options_.degree); }
  void fit(const TabularDataset& data) override;
  std::vector<double> distribution(std::span<const double> row) const override;

  const BinarySvm& pair_model(std::size_t k) const { return models_[k].svm; }
  std::size_t pair_count() const noexcept { return models_.size(); }
  const Standardizer& standardizer() const noexcept { return scale_; }

 private:
  struct Pair {
    int first;
    int second;
    BinarySvm svm;
  };
  SvmOptions options_;
  Standardizer scale_;
  int class_count_ = 0;
  std::vector<Pair> models_;
  int only_class_ = -1;
};

/// k-nearest neighbours under Euclidean distance on min-max scaled
/// features. k is chosen by leave-one-out over 1..min(n/2, max_k), smallest
/// k on ties; the distribution is the neighbour vote share.
class Knn : public TabularClassifier {
 public:
  explicit Knn(std::size_t max_k = 100) : max_k_(max_k) {}
  std::string name() const override { return "knn"; }
  void fit(const TabularDataset& data) override;
  std::vector<double> distribution(std::span<const double> row) const override;
  std::size_t k() const noexcept { return k_; }

 private:
  std::vector<double> scaled(std::span<const double> row) const;
  std::size_t max_k_;
  std::size_t k_ = 1;
  int class_count_ = 0;
  std::vector<double> lo_, range_;
  FeatureMatrix x_;
  std::vector<int> y_;
};

/// Normalised weighted sum of member distributions. Members must already be
/// fitted. Throws ParameterError for negative or all-zero weights.
std::vector<double> weighted_combination(std::span<const std::vector<double>> distributions,
                                         std::span<const double> weights);

class WeightedEnsemble : public TabularClassifier {
 public:
  WeightedEnsemble() = default;
  WeightedEnsemble(std::vector<std::unique_ptr<TabularClassifier>> members, std::vector<double> weights);

  std::string name() const override { return "weighted"; }
  /// Refits every member on data; weights are unchanged.
  void fit(const TabularDataset& data) override;
  std::vector<double> distribution(std::span<const double> row) const override;
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<std::unique_ptr<TabularClassifier>> members_;
  std::vector<double> weights_;
};

/// Members weighted by their k-fold CV accuracy on the training table, then
/// refitted on all of it. Prediction is a weighted vote of member classes.
/// If every member scores zero the weights fall back to equal.
class CvWeightedEnsemble : public TabularClassifier {
 public:
  CvWeightedEnsemble(std::vector<TabularFactory> members, int folds = 10, std::uint64_t seed = 0)
      : factories_(std::move(members)), folds_(folds), seed_(seed) {}

  std::string name() const override { return "cvweighted"; }
  void fit(const TabularDataset& data) override;
  std::vector<double> distribution(std::span<const double> row) const override;

  std::size_t member_count() const noexcept { return factories_.size(); }
  const TabularClassifier& member(std::size_t i) const { return *members_.at(i); }
  /// CV accuracies; the vote uses these unless all are zero.
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<TabularFactory> factories_;
  int folds_;
  std::uint64_t seed_;
  int class_count_ = 0;
  std::vector<std::unique_ptr<TabularClassifier>> members_;
  std::vector<double> weights_;
  std::vector<double> vote_weights_;
};

}  // namespace tsc
