#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tsc/classifier.hpp"
#include "tsc/learners.hpp"
#include "tsc/nn.hpp"
#include "tsc/shapelets.hpp"

namespace tsc {

/// argmax over classes of the summed weights of members voting for each
/// class. Ties, including masses within 1e-12 of the top, go to the lower
/// class id. Normalised vote mass is returned.
std::vector<double> weighted_vote(std::span<const int> votes, std::span<const double> weights,
                                  int class_count);

/// The eleven 1-NN members: ED, full DTW, DTW with CV window, the same two
/// on derivatives, WDTW, WDDTW, LCSS, ERP, TWE and MSM.
std::vector<std::unique_ptr<Classifier>> elastic_members(LoocvOptions options = {});

/// Classifiers trained independently and combined by a vote weighted with
/// each member's own train accuracy estimate.
class VotingEnsemble : public Classifier {
 public:
  VotingEnsemble(std::string name, std::vector<std::unique_ptr<Classifier>> members);
  std::string name() const override { return name_; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override;
  std::string selected_params() const override;

  std::size_t member_count() const noexcept { return members_.size(); }
  const Classifier& member(std::size_t i) const { return *members_.at(i); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Replaces the fitted weights; must stay non-negative with a positive sum.
  void set_weights(std::vector<double> weights);
  std::vector<int> member_predictions(std::span<const double> series) const;

 private:
  std::string name_;
  std::vector<std::unique_ptr<Classifier>> members_;
  std::vector<double> weights_;
  int class_count_ = 0;
};

class ElasticEnsemble : public VotingEnsemble {
 public:
  explicit ElasticEnsemble(LoocvOptions options = {}) : VotingEnsemble("ee", elastic_members(options)) {}
};

using SeriesTransform = std::function<Series(std::span<const double>)>;

/// A tabular learner applied to a fixed transform of each series.
class TransformClassifier : public Classifier {
 public:
  TransformClassifier(std::string name, SeriesTransform transform, TabularFactory learner);
  std::string name() const override { return name_; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }

  const TabularClassifier& learner() const { return *model_; }
  Series features(std::span<const double> series) const { return transform_(series); }
  /// Transformed training table, kept for inspection.
  TabularDataset table(const Dataset& data) const;

 private:
  std::string name_;
  SeriesTransform transform_;
  TabularFactory factory_;
  std::unique_ptr<TabularClassifier> model_;
  double train_accuracy_ = std::numeric_limits<double>::quiet_NaN();
};

/// ACF with max_lag = min(m - 2, 100), at least 1.
Series cote_acf(std::span<const double> series);

struct CoteOptions {
  LoocvOptions loocv{};
  StOptions shapelets{};
  std::uint64_t seed = 0;
};

/// Flat pool of 20 members: the elastic ensemble's 11 1-NN classifiers and
/// kNN / naive Bayes / random forest on the shapelet, ACF and power
/// spectrum representations. Each member votes with its train CV accuracy
/// (LOOCV for the 1-NN members, 10-fold for the rest).
class CoteLite : public Classifier {
 public:
  static constexpr std::size_t kPoolSize = 20;

  explicit CoteLite(CoteOptions options = {});
  std::string name() const override { return "cote-lite"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override;
  std::string selected_params() const override;

  std::size_t member_count() const noexcept { return kPoolSize; }
  std::vector<std::string> member_names() const;
  const std::vector<double>& weights() const noexcept { return weights_; }
  void set_weights(std::vector<double> weights);
  std::vector<int> member_predictions(std::span<const double> series) const;
  /// "member,weight,prediction" rows for one query.
  std::string member_report(std::span<const double> series) const;

  /// The fitted elastic part; predicts exactly like a separately fitted
  /// ElasticEnsemble on the same data.
  const ElasticEnsemble& elastic() const noexcept { return ee_; }

 private:
  CoteOptions options_;
  int class_count_ = 0;
  ElasticEnsemble ee_;
  ShapeletTransformClassifier st_;
  std::unique_ptr<CvWeightedEnsemble> acf_, ps_;
  std::vector<double> weights_;
};

}  // namespace tsc
