#include "tsc/classifier.hpp"

#include "tsc/error.hpp"
#include "tsc/parallel.hpp"

namespace tsc {

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

std::vector<double> one_hot(int label, int class_count) {
  std::vector<double> out(static_cast<std::size_t>(class_count), 0.0);
  out[static_cast<std::size_t>(label)] = 1.0;
  return out;
}

std::vector<int> predict_all(const Classifier& classifier, const Dataset& data) {
  std::vector<int> out(data.size());
  parallel_for(data.size(), [&](std::size_t i) { out[i] = classifier.predict(data.series(i)); });
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw InputError("accuracy needs equal, non-empty prediction and label lists");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double accuracy(const Classifier& classifier, const Dataset& data) {
  const auto predicted = predict_all(classifier, data);
  return accuracy(predicted, data.labels());
}

}  // namespace tsc
