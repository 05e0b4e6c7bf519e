#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tsc/classifier.hpp"
#include "tsc/distance.hpp"

namespace tsc {

/// Symmetric pairwise distances with an implicit zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n = 0) : n_(n), values_(n * (n > 0 ? n - 1 : 0) / 2, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return values_[offset(i, j)];
  }
  void set(std::size_t i, std::size_t j, double value) { values_[offset(i, j)] = value; }

  /// this += weight * other, entrywise.
  void accumulate(double weight, const DistanceMatrix& other);

 private:
  std::size_t offset(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }
  std::size_t n_;
  std::vector<double> values_;
};

DistanceMatrix distance_matrix(std::span<const PreparedSeries> series, const DistanceSpec& spec);

/// Label of the nearest training case; ties go to the lowest index.
/// Throws LengthError if the query length differs from the training length.
int one_nn_predict(const Dataset& train, const DistanceSpec& spec, std::span<const double> query);

/// Leave-one-out 1-NN predictions from a precomputed matrix, same tie rule.
std::vector<int> loocv_predictions(const DistanceMatrix& distances, std::span<const int> labels);
double loocv_accuracy(const DistanceMatrix& distances, std::span<const int> labels);

struct LoocvOptions {
  /// Grid search runs on a stratified subsample when n exceeds this.
  std::size_t subsample_cap = 500;
  std::uint64_t seed = 0;
};

struct LoocvSelection {
  DistanceSpec best;
  double train_accuracy = 0.0;
  std::size_t best_index = 0;
  std::vector<double> accuracies;  // one per grid entry
};

/// Grid entry with the highest leave-one-out accuracy, earliest on ties.
/// Component distances are computed once and reused across entries that
/// share them (mixtures, DTW windows mapping to the same band).
/// Throws ParameterError on an empty grid, InputError if n < 2.
LoocvSelection loocv_select(const Dataset& train, std::span<const DistanceSpec> grid,
                            const LoocvOptions& options = {});

/// Selected-parameter CSV line: "dataset,fold,classifier,selected_spec,train_acc".
std::string selection_log_line(const std::string& dataset, std::size_t fold,
                               const std::string& classifier, const std::string& spec,
                               double train_accuracy);

/// Parameter grids searched by the elastic 1-NN classifiers.
namespace grids {
std::vector<DistanceSpec> dtw_windows();        // r = 0.00 .. 0.99
std::vector<DistanceSpec> ddtw_windows();       // r = 0.00 .. 0.99 on first differences
std::vector<DistanceSpec> wdtw();               // g = 0, 0.01, .., 1
std::vector<DistanceSpec> wddtw();
std::vector<DistanceSpec> twe();                // 6 stiffness x 5 penalty values
std::vector<DistanceSpec> msm();                // c in {0.01, 0.1, 1, 10, 100}
std::vector<DistanceSpec> dd_dtw();             // alpha = 0, 0.01, .., 1
std::vector<DistanceSpec> dtd_c();              // alpha, beta on a 0.1 lattice, alpha+beta <= 1
std::vector<DistanceSpec> lcss(const Dataset& train);  // 10 epsilons x 10 bands
std::vector<DistanceSpec> erp();                // gap 0, 10 bands in [0, 0.25]
}  // namespace grids

using GridFactory = std::function<std::vector<DistanceSpec>(const Dataset&)>;

/// 1-NN over one distance family, parameters chosen by LOOCV.
class NearestNeighbor : public Classifier {
 public:
  NearestNeighbor(std::string name, GridFactory grid, LoocvOptions options = {});
  NearestNeighbor(std::string name, DistanceSpec fixed, LoocvOptions options = {});

  std::string name() const override { return name_; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  int predict(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override { return spec_.to_string(); }

  const DistanceSpec& spec() const noexcept { return spec_; }

 protected:
  void set_model(const Dataset& train, DistanceSpec spec, double train_accuracy);
  const LoocvOptions& options() const noexcept { return options_; }
  const GridFactory& grid() const noexcept { return grid_; }

 private:
  std::string name_;
  GridFactory grid_;
  LoocvOptions options_;
  DistanceSpec spec_;
  double train_accuracy_ = 0.0;
  int class_count_ = 0;
  std::vector<PreparedSeries> train_;
  std::vector<int> labels_;
};

/// CID over windowed DTW, window taken from the DTW leave-one-out optimum.
class CidNearestNeighbor : public NearestNeighbor {
 public:
  explicit CidNearestNeighbor(LoocvOptions options = {});
  void fit(const Dataset& train) override;
};

}  // namespace tsc
