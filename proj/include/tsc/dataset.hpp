#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsc {

using Series = std::vector<double>;

/// Equal-length univariate series with dense class ids in [0, class_count).
/// Immutable once constructed.
class Dataset {
 public:
  Dataset() = default;

  /// Throws LengthError for ragged or too-short series, InputError for an
  /// empty case list or out-of-range labels, ParameterError for c < 2.
  Dataset(std::vector<Series> series, std::vector<int> labels, int class_count,
          std::vector<std::string> class_names = {});

  std::size_t size() const noexcept { return series_.size(); }
  bool empty() const noexcept { return series_.empty(); }
  std::size_t series_length() const noexcept { return series_.empty() ? 0 : series_.front().size(); }
  int class_count() const noexcept { return class_count_; }

  const Series& series(std::size_t i) const { return series_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<Series>& all_series() const noexcept { return series_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Original label tokens, indexed by class id.
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  std::vector<std::size_t> class_counts() const;

  Dataset subset(std::span<const std::size_t> indices) const;

  /// Same labels, every series replaced by fn(series).
  template <typename Fn>
  Dataset map_series(Fn&& fn) const {
    std::vector<Series> out;
    out.reserve(series_.size());
    for (const auto& s : series_) out.push_back(fn(s));
    return Dataset(std::move(out), labels_, class_count_, class_names_);
  }

 private:
  std::vector<Series> series_;
  std::vector<int> labels_;
  int class_count_ = 0;
  std::vector<std::string> class_names_;
};

/// Concatenation of two datasets sharing a label space.
Dataset concatenate(const Dataset& first, const Dataset& second);

}  // namespace tsc
