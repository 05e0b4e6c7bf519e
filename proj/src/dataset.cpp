#include "tsc/dataset.hpp"

#include "tsc/error.hpp"

namespace tsc {

Dataset::Dataset(std::vector<Series> series, std::vector<int> labels, int class_count,
                 std::vector<std::string> class_names)
    : series_(std::move(series)),
      labels_(std::move(labels)),
      class_count_(class_count),
      class_names_(std::move(class_names)) {
  if (series_.empty()) throw InputError("dataset has no cases");
  if (series_.size() != labels_.size()) throw InputError("series and label counts differ");
  if (class_count_ < 2) throw ParameterError("dataset needs at least two classes");
  const std::size_t m = series_.front().size();
  if (m < 2) throw LengthError("series length must be at least 2");
  for (std::size_t i = 0; i < series_.size(); ++i) {
    if (series_[i].size() != m)
      throw LengthError("case " + std::to_string(i) + " has length " +
                        std::to_string(series_[i].size()) + ", expected " + std::to_string(m));
    if (labels_[i] < 0 || labels_[i] >= class_count_)
      throw InputError("label out of range at case " + std::to_string(i));
  }
  if (class_names_.empty())
    for (int c = 0; c < class_count_; ++c) class_names_.push_back(std::to_string(c));
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count_), 0);
  for (int label : labels_) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Series> series;
  std::vector<int> labels;
  series.reserve(indices.size());
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    series.push_back(series_.at(i));
    labels.push_back(labels_.at(i));
  }
  return Dataset(std::move(series), std::move(labels), class_count_, class_names_);
}

Dataset concatenate(const Dataset& first, const Dataset& second) {
  if (first.class_count() != second.class_count())
    throw InputError("cannot concatenate datasets with different class counts");
  std::vector<Series> series = first.all_series();
  std::vector<int> labels = first.labels();
  series.insert(series.end(), second.all_series().begin(), second.all_series().end());
  labels.insert(labels.end(), second.labels().begin(), second.labels().end());
  return Dataset(std::move(series), std::move(labels), first.class_count(), first.class_names());
}

}  // namespace tsc
