#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tsc/dataset.hpp"

namespace tsc {

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(std::span<const double> values);

std::vector<double> one_hot(int label, int class_count);

/// A time series classifier. fit() trains in place; afterwards the object is
/// only read, so predictions may be issued concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string name() const = 0;
  virtual void fit(const Dataset& train) = 0;

  /// Class probability estimate; sums to 1.
  virtual std::vector<double> distribution(std::span<const double> series) const = 0;

  virtual int predict(std::span<const double> series) const { return argmax(distribution(series)); }

  /// Training-set accuracy estimate from internal model selection or CV.
  /// NaN if the classifier computes none.
  virtual double train_accuracy() const { return std::numeric_limits<double>::quiet_NaN(); }

  /// Parameters chosen during fit(), for results files.
  virtual std::string selected_params() const { return {}; }
};

std::vector<int> predict_all(const Classifier& classifier, const Dataset& data);
double accuracy(std::span<const int> predicted, std::span<const int> truth);
double accuracy(const Classifier& classifier, const Dataset& data);

}  // namespace tsc
