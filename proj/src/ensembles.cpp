#include "tsc/ensembles.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/error.hpp"
#include "tsc/nn.hpp"
#include "tsc/parallel.hpp"
#include "tsc/transforms.hpp"
#include "tsc/trees.hpp"

namespace tsc {

std::vector<double> weighted_vote(std::span<const int> votes, std::span<const double> weights,
                                  int class_count) {
  if (votes.size() != weights.size()) throw SizeError("one weight per vote required");
  std::vector<std::vector<double>> hot;
  hot.reserve(votes.size());
  for (int v : votes) hot.push_back(one_hot(v, class_count));
  auto mass = weighted_combination(hot, weights);
  // Sums that tie exactly in real arithmetic can differ in the last bits
  // depending on the weight scale. Snap those to the maximum so the tie
  // rule, not rounding, picks the winner.
  const double top = *std::max_element(mass.begin(), mass.end());
  for (double& m : mass)
    if (top - m <= 1e-12) m = top;
  return mass;
}

std::vector<std::unique_ptr<Classifier>> elastic_members(LoocvOptions o) {
  std::vector<std::unique_ptr<Classifier>> m;
  m.push_back(std::make_unique<NearestNeighbor>("ed", DistanceSpec::ed(), o));
  m.push_back(std::make_unique<NearestNeighbor>("dtw", DistanceSpec::dtw(1.0), o));
  m.push_back(std::make_unique<NearestNeighbor>("dtwcv", [](const Dataset&) { return grids::dtw_windows(); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("ddtw", DistanceSpec::ddtw(1.0), o));
  m.push_back(std::make_unique<NearestNeighbor>("ddtwcv", [](const Dataset&) { return grids::ddtw_windows(); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("wdtw", [](const Dataset&) { return grids::wdtw(); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("wddtw", [](const Dataset&) { return grids::wddtw(); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("lcss", [](const Dataset& d) { return grids::lcss(d); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("erp", [](const Dataset&) { return grids::erp(); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("twe", [](const Dataset&) { return grids::twe(); }, o));
  m.push_back(std::make_unique<NearestNeighbor>("msm", [](const Dataset&) { return grids::msm(); }, o));
  return m;
}

VotingEnsemble::VotingEnsemble(std::string name, std::vector<std::unique_ptr<Classifier>> members)
    : name_(std::move(name)), members_(std::move(members)) {
  if (members_.empty()) throw ParameterError("ensemble needs members");
}

void VotingEnsemble::fit(const Dataset& train) {
  class_count_ = train.class_count();
  weights_.assign(members_.size(), 0.0);
  parallel_for(members_.size(), [&](std::size_t i) {
    members_[i]->fit(train);
    const double w = members_[i]->train_accuracy();
    weights_[i] = std::isnan(w) ? 0.0 : w;
  });
  if (std::all_of(weights_.begin(), weights_.end(), [](double w) { return w <= 0.0; }))
    weights_.assign(members_.size(), 1.0);
}

void VotingEnsemble::set_weights(std::vector<double> weights) {
  if (weights.size() != members_.size()) throw SizeError("one weight per member required");
  std::vector<std::vector<double>> probe(weights.size(), std::vector<double>{1.0});
  weighted_combination(probe, weights);
  weights_ = std::move(weights);
}

std::vector<int> VotingEnsemble::member_predictions(std::span<const double> series) const {
  std::vector<int> out(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) out[i] = members_[i]->predict(series);
  return out;
}

std::vector<double> VotingEnsemble::distribution(std::span<const double> series) const {
  if (weights_.empty()) throw InputError("ensemble is not fitted");
  return weighted_vote(member_predictions(series), weights_, class_count_);
}

double VotingEnsemble::train_accuracy() const {
  return weights_.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : *std::max_element(weights_.begin(), weights_.end());
}

std::string VotingEnsemble::selected_params() const {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < members_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "=%.4f", i < weights_.size() ? weights_[i] : 0.0);
    out += (i ? "|" : "") + members_[i]->name() + buf;
  }
  return out;
}

TransformClassifier::TransformClassifier(std::string name, SeriesTransform transform,
                                         TabularFactory learner)
    : name_(std::move(name)), transform_(std::move(transform)), factory_(std::move(learner)) {}

TabularDataset TransformClassifier::table(const Dataset& data) const {
  TabularDataset t;
  t.class_count = data.class_count();
  t.y = data.labels();
  std::vector<Series> rows(data.size());
  parallel_for(data.size(), [&](std::size_t i) { rows[i] = transform_(data.series(i)); });
  for (const auto& r : rows) t.x.push_row(r);
  return t;
}

void TransformClassifier::fit(const Dataset& train) {
  model_ = factory_();
  model_->fit(table(train));
  train_accuracy_ = std::numeric_limits<double>::quiet_NaN();
  if (const auto* forest = dynamic_cast<const RandomForest*>(model_.get())) {
    const double err = forest->oob_error();
    if (!std::isnan(err)) train_accuracy_ = 1.0 - err;
  }
}

std::vector<double> TransformClassifier::distribution(std::span<const double> series) const {
  if (!model_) throw InputError("classifier is not fitted");
  return model_->distribution(transform_(series));
}

Series cote_acf(std::span<const double> series) {
  const std::size_t m = series.size();
  const std::size_t lag = std::max<std::size_t>(1, std::min<std::size_t>(m >= 2 ? m - 2 : 1, 100));
  return acf_transform(series, lag);
}

CoteLite::CoteLite(CoteOptions options)
    : options_(options), ee_(options.loocv), st_([&] {
        StOptions s = options.shapelets;
        s.seed = options.seed;
        return s;
      }()) {}

namespace {

TabularDataset transformed(const Dataset& data, Series (*fn)(std::span<const double>)) {
  TabularDataset t;
  t.class_count = data.class_count();
  t.y = data.labels();
  std::vector<Series> rows(data.size());
  parallel_for(data.size(), [&](std::size_t i) { rows[i] = fn(data.series(i)); });
  for (const auto& r : rows) t.x.push_row(r);
  return t;
}

Series power_spectrum(std::span<const double> s) { return ps_transform(s); }

}  // namespace

void CoteLite::fit(const Dataset& train) {
  class_count_ = train.class_count();
  acf_ = std::make_unique<CvWeightedEnsemble>(transform_ensemble_members(options_.seed), 10, options_.seed);
  ps_ = std::make_unique<CvWeightedEnsemble>(transform_ensemble_members(options_.seed), 10, options_.seed);
  // Four independent parts; each writes only its own state.
  parallel_for(4, [&](std::size_t part) {
    switch (part) {
      case 0: ee_.fit(train); break;
      case 1: st_.fit(train); break;
      case 2: acf_->fit(transformed(train, cote_acf)); break;
      default: ps_->fit(transformed(train, power_spectrum)); break;
    }
  });
  weights_ = ee_.weights();
  for (const CvWeightedEnsemble* e : {&st_.ensemble(), static_cast<const CvWeightedEnsemble*>(acf_.get()),
                                      static_cast<const CvWeightedEnsemble*>(ps_.get())})
    weights_.insert(weights_.end(), e->weights().begin(), e->weights().end());
  if (std::all_of(weights_.begin(), weights_.end(), [](double w) { return w <= 0.0; }))
    weights_.assign(weights_.size(), 1.0);
}

void CoteLite::set_weights(std::vector<double> weights) {
  if (weights.size() != kPoolSize) throw SizeError("one weight per member required");
  std::vector<std::vector<double>> probe(weights.size(), std::vector<double>{1.0});
  weighted_combination(probe, weights);
  weights_ = std::move(weights);
}

std::vector<int> CoteLite::member_predictions(std::span<const double> series) const {
  if (!acf_) throw InputError("classifier is not fitted");
  auto votes = ee_.member_predictions(series);
  const auto shapelet_row = st_.features(series);
  const auto acf_row = cote_acf(series);
  const auto ps_row = ps_transform(series);
  const std::pair<const CvWeightedEnsemble*, const Series*> parts[] = {
      {&st_.ensemble(), &shapelet_row}, {acf_.get(), &acf_row}, {ps_.get(), &ps_row}};
  for (const auto& [ens, row] : parts)
    for (std::size_t i = 0; i < ens->member_count(); ++i) votes.push_back(ens->member(i).predict(*row));
  return votes;
}

std::vector<double> CoteLite::distribution(std::span<const double> series) const {
  return weighted_vote(member_predictions(series), weights_, class_count_);
}

double CoteLite::train_accuracy() const {
  return weights_.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : *std::max_element(weights_.begin(), weights_.end());
}

std::vector<std::string> CoteLite::member_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < ee_.member_count(); ++i) names.push_back(ee_.member(i).name());
  for (const char* view : {"st", "acf", "ps"})
    for (const char* learner : {"knn", "nb", "randf"}) names.push_back(std::string(view) + "-" + learner);
  return names;
}

std::string CoteLite::member_report(std::span<const double> series) const {
  const auto names = member_names();
  const auto votes = member_predictions(series);
  std::string out = "member,weight,prediction\n";
  char buf[32];
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", weights_[i]);
    out += names[i] + "," + buf + "," + std::to_string(votes[i]) + "\n";
  }
  return out;
}

std::string CoteLite::selected_params() const {
  const auto names = member_names();
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < names.size() && i < weights_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "=%.4f", weights_[i]);
    out += (i ? "|" : "") + names[i] + buf;
  }
  return out;
}

}  // namespace tsc
