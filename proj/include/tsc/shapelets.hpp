#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsc/classifier.hpp"
#include "tsc/learners.hpp"

namespace tsc {

/// A z-normalised subsequence of a training series.
struct Shapelet {
  std::vector<double> values;
  std::size_t source = 0;
  std::size_t start = 0;
  int class_label = 0;
  double quality = 0.0;
  double gap = 0.0;  // separation at the best split; breaks quality ties

  std::size_t length() const noexcept { return values.size(); }
  /// Half-open span [start, start + length) inside the source series.
  bool overlaps(const Shapelet& other) const noexcept;
};

Shapelet make_shapelet(std::span<const double> series, std::size_t source, std::size_t start,
                       std::size_t length, int class_label = 0);

/// Minimum over alignments of the mean squared difference between the
/// shapelet and each z-normalised window of the series. The first overload
/// z-normalises its argument. Throws LengthError if the shapelet is longer.
double sdist(std::span<const double> subsequence, std::span<const double> series);
double sdist(const Shapelet& shapelet, std::span<const double> series);

struct SplitQuality {
  double gain = 0.0;
  double threshold = 0.0;
  /// Mean distance right of the threshold minus mean distance left of it.
  double gap = 0.0;
};

/// Orders by gain, then gap.
bool better(const SplitQuality& a, const SplitQuality& b);

/// Best information gain over thresholds between distinct sorted distances;
/// cases with distance <= threshold go left. Equal gains go to the wider gap.
SplitQuality best_split(std::span<const double> distances, std::span<const int> labels,
                        int class_count);

/// One-vs-rest information gain for target_class. Zero when either side of
/// the binarised labels is empty.
double assess_candidate(std::span<const double> distances, std::span<const int> labels,
                        int target_class);
SplitQuality assess_split(std::span<const double> distances, std::span<const int> labels,
                          int target_class);

/// Quality descending, then gap descending.
bool ranks_before(const Shapelet& a, const Shapelet& b);

struct StOptions {
  std::size_t min_length = 3;
  std::size_t max_length = 0;      // 0: m - 1
  std::size_t k = 0;               // 0: min(10 n, 1000)
  std::size_t length_step = 0;     // 0: 1, or 2 when m > 500
  std::size_t position_stride = 1;
  /// Candidate budget over the whole search; 0 evaluates every candidate.
  /// Each series keeps an equal share chosen at random.
  std::size_t max_candidates = 0;
  std::uint64_t seed = 0;
};

/// Drops, in order, every shapelet overlapping an earlier one from the same
/// series. Input is assumed sorted by quality, best first.
std::vector<Shapelet> remove_self_similar(std::vector<Shapelet> sorted);

/// Keeps at most quota shapelets for the class of the incoming ones, the
/// existing entries winning full ties.
void merge_shapelets(std::vector<Shapelet>& selected, std::size_t quota,
                     std::vector<Shapelet> incoming);

std::vector<Shapelet> binary_shapelet_selection(const Dataset& train, const StOptions& options = {});

std::vector<double> shapelet_features(std::span<const Shapelet> shapelets,
                                      std::span<const double> series);
/// Rows are sdist to each shapelet in list order. Labels are copied through
/// but never read.
TabularDataset shapelet_transform(std::span<const Shapelet> shapelets, const Dataset& data);

/// "class,quality,source,start,length,v1,..."
std::string shapelets_csv(std::span<const Shapelet> shapelets);

/// kNN, Gaussian naive Bayes and a 500-tree forest.
std::vector<TabularFactory> transform_ensemble_members(std::uint64_t seed);

class ShapeletTransformClassifier : public Classifier {
 public:
  explicit ShapeletTransformClassifier(StOptions options = {}) : options_(options) {}
  std::string name() const override { return "st"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override;

  const std::vector<Shapelet>& shapelets() const noexcept { return shapelets_; }
  const CvWeightedEnsemble& ensemble() const { return *ensemble_; }
  std::vector<double> features(std::span<const double> series) const {
    return shapelet_features(shapelets_, series);
  }

 private:
  StOptions options_;
  std::vector<Shapelet> shapelets_;
  std::unique_ptr<CvWeightedEnsemble> ensemble_;
  double train_accuracy_ = 0.0;
};

struct FsOptions {
  int projections = 10;
  std::size_t top_k = 10;
  std::size_t word_length = 16;
  int alphabet = 4;
  std::size_t min_length = 5;
  std::size_t length_step = 1;
  std::uint64_t seed = 0;
};

/// Shapelet decision tree whose per-node search scores SAX words by random
/// projection collisions and evaluates only the best few exactly.
class FastShapelets : public Classifier {
 public:
  struct Node {
    Shapelet shapelet;
    double threshold = 0.0;
    int left = -1, right = -1;  // -1 on leaves
    std::vector<double> dist;
  };

  explicit FastShapelets(FsOptions options = {}) : options_(options) {}
  std::string name() const override { return "fs"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  std::string selected_params() const override;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const;

 private:
  FsOptions options_;
  int class_count_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace tsc
