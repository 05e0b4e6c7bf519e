#include "tsc/nn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>

#include "tsc/error.hpp"
#include "tsc/parallel.hpp"
#include "tsc/resample.hpp"
#include "tsc/transforms.hpp"

namespace tsc {

void DistanceMatrix::accumulate(double weight, const DistanceMatrix& other) {
  if (other.n_ != n_) throw SizeError("distance matrix sizes differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += weight * other.values_[k];
}

DistanceMatrix distance_matrix(std::span<const PreparedSeries> series, const DistanceSpec& spec) {
  const std::size_t n = series.size();
  DistanceMatrix out(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) out.set(i, j, distance(spec, series[i], series[j]));
  });
  return out;
}

int one_nn_predict(const Dataset& train, const DistanceSpec& spec, std::span<const double> query) {
  if (train.empty()) throw InputError("empty training set");
  if (query.size() != train.series_length()) throw LengthError("query length differs from training length");
  const PreparedSeries q = prepare(query, spec);
  double best = kInfinity;
  int label = train.label(0);
  for (std::size_t j = 0; j < train.size(); ++j) {
    const double d = distance(spec, q, prepare(train.series(j), spec), best);
    if (d < best) {
      best = d;
      label = train.label(j);
    }
  }
  return label;
}

std::vector<int> loocv_predictions(const DistanceMatrix& distances, std::span<const int> labels) {
  const std::size_t n = distances.size();
  if (labels.size() != n) throw SizeError("label count differs from matrix size");
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = kInfinity;
    int label = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = distances(i, j);
      if (label < 0 || d < best) {
        best = d;
        label = labels[j];
      }
    }
    out[i] = label;
  }
  return out;
}

double loocv_accuracy(const DistanceMatrix& distances, std::span<const int> labels) {
  const auto predicted = loocv_predictions(distances, labels);
  return accuracy(predicted, labels);
}

namespace {

bool needs_view(const std::vector<DistanceComponent>& components, SeriesView view) {
  for (const auto& c : components)
    if (c.view == view) return true;
  return false;
}

// Cache key identifying a component matrix. DTW windows that map to the
// same integer band produce identical matrices.
std::string component_key(const DistanceComponent& c, std::size_t m) {
  std::string key = std::to_string(static_cast<int>(c.view)) + "|";
  if (c.base.kind == DistanceKind::DTW)
    return key + "dtw/" + std::to_string(warping_band(c.base.window, m));
  return key + c.base.to_string();
}

// Leave-one-out accuracy of one measure without the full matrix: a pair is
// abandoned once it is farther than the current nearest neighbour of both
// ends, so every stored value that can win a row (ties included) is exact.
// Serial on purpose; callers spread grid entries over the workers.
double pruned_loocv_accuracy(std::span<const PreparedSeries> series, const DistanceSpec& spec,
                             std::span<const int> labels) {
  const std::size_t n = series.size();
  DistanceMatrix d(n);
  std::vector<double> nearest(n, kInfinity);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = distance(spec, series[i], series[j], std::max(nearest[i], nearest[j]));
      d.set(i, j, v);
      nearest[i] = std::min(nearest[i], v);
      nearest[j] = std::min(nearest[j], v);
    }
  return loocv_accuracy(d, labels);
}

}  // namespace

LoocvSelection loocv_select(const Dataset& full, std::span<const DistanceSpec> grid,
                            const LoocvOptions& options) {
  if (grid.empty()) throw ParameterError("empty parameter grid");
  if (full.size() < 2) throw InputError("leave-one-out needs at least two cases");

  Dataset train = full;
  if (options.subsample_cap >= 2 && full.size() > options.subsample_cap) {
    const auto keep = stratified_subsample(full, options.subsample_cap, options.seed);
    train = full.subset(keep);
  }
  const std::size_t n = train.size();
  const std::size_t m = train.series_length();

  std::vector<std::vector<DistanceComponent>> components;
  bool want_diff = false, want_cosine = false, want_complexity = false;
  for (const auto& spec : grid) {
    components.push_back(linear_components(spec));
    want_diff = want_diff || needs_view(components.back(), SeriesView::Diff);
    want_cosine = want_cosine || needs_view(components.back(), SeriesView::Cosine);
    want_complexity = want_complexity || spec.kind == DistanceKind::CID;
  }

  // One prepared list per view, each holding that view as its raw series so
  // the single-view base measures read it directly.
  std::vector<PreparedSeries> raw(n), diff, cosine;
  std::vector<double> complexity(n, 0.0);
  if (want_diff) diff.resize(n);
  if (want_cosine) cosine.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = train.series(i);
    raw[i].raw = s;
    if (want_diff) diff[i].raw = diff_transform(s);
    if (want_cosine) cosine[i].raw = cosine_transform(s);
    if (want_complexity) complexity[i] = complexity_estimate(s);
  }
  auto view_list = [&](SeriesView v) -> const std::vector<PreparedSeries>& {
    if (v == SeriesView::Diff) return diff;
    if (v == SeriesView::Cosine) return cosine;
    return raw;
  };

  std::map<std::string, std::shared_ptr<DistanceMatrix>> cache;
  auto component_matrix = [&](const DistanceComponent& c) {
    const auto key = component_key(c, m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto mat = std::make_shared<DistanceMatrix>(distance_matrix(view_list(c.view), c.base));
    cache.emplace(key, mat);
    return mat;
  };

  // Single-measure entries only need nearest neighbours; score each distinct
  // matrix once, in parallel across entries.
  std::map<std::string, double> single_acc;
  std::vector<const DistanceComponent*> singles;
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (components[g].size() == 1 && grid[g].kind != DistanceKind::CID) {
      const auto key = component_key(components[g].front(), m);
      if (single_acc.emplace(key, 0.0).second) singles.push_back(&components[g].front());
    }
  std::vector<double> scores(singles.size());
  parallel_for(singles.size(), [&](std::size_t k) {
    scores[k] = pruned_loocv_accuracy(view_list(singles[k]->view), singles[k]->base, train.labels());
  });
  for (std::size_t k = 0; k < singles.size(); ++k) single_acc[component_key(*singles[k], m)] = scores[k];

  LoocvSelection result;
  result.accuracies.assign(grid.size(), 0.0);
  double best = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& spec = grid[g];
    if (spec.kind == DistanceKind::DTDc &&
        (spec.alpha < 0.0 || spec.beta < 0.0 || spec.alpha + spec.beta > 1.0 + 1e-12))
      throw ParameterError("dtd_c weights need alpha, beta >= 0 and alpha + beta <= 1");
    double acc;
    const auto& comps = components[g];
    if (comps.size() == 1 && spec.kind != DistanceKind::CID) {
      acc = single_acc.at(component_key(comps.front(), m));
    } else {
      DistanceMatrix mixed(n);
      for (const auto& c : comps) mixed.accumulate(c.weight, *component_matrix(c));
      if (spec.kind == DistanceKind::CID) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            mixed.set(i, j, mixed(i, j) * complexity_correction(complexity[i], complexity[j]));
      }
      acc = loocv_accuracy(mixed, train.labels());
    }
    result.accuracies[g] = acc;
    if (acc > best) {
      best = acc;
      result.best_index = g;
    }
  }
  result.best = grid[result.best_index];
  result.train_accuracy = best;
  return result;
}

std::string selection_log_line(const std::string& dataset, std::size_t fold,
                               const std::string& classifier, const std::string& spec,
                               double train_accuracy) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, train_accuracy);
  std::string acc(buf, r.ptr);
  std::string quoted = spec;
  if (quoted.find_first_of(",\"") != std::string::npos) {
    std::string q = "\"";
    for (char ch : spec) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    quoted = q + "\"";
  }
  return dataset + "," + std::to_string(fold) + "," + classifier + "," + quoted + "," + acc;
}

namespace grids {

std::vector<DistanceSpec> dtw_windows() {
  std::vector<DistanceSpec> out;
  for (int i = 0; i < 100; ++i) out.push_back(DistanceSpec::dtw(i / 100.0));
  return out;
}

std::vector<DistanceSpec> ddtw_windows() {
  std::vector<DistanceSpec> out;
  for (int i = 0; i < 100; ++i) out.push_back(DistanceSpec::ddtw(i / 100.0));
  return out;
}

std::vector<DistanceSpec> wdtw() {
  std::vector<DistanceSpec> out;
  for (int i = 0; i <= 100; ++i) out.push_back(DistanceSpec::wdtw(i / 100.0));
  return out;
}

std::vector<DistanceSpec> wddtw() {
  std::vector<DistanceSpec> out;
  for (int i = 0; i <= 100; ++i) out.push_back(DistanceSpec::wddtw(i / 100.0));
  return out;
}

std::vector<DistanceSpec> twe() {
  std::vector<DistanceSpec> out;
  for (double nu : {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0})
    for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) out.push_back(DistanceSpec::twe(nu, lambda));
  return out;
}

std::vector<DistanceSpec> msm() {
  std::vector<DistanceSpec> out;
  for (double c : {0.01, 0.1, 1.0, 10.0, 100.0}) out.push_back(DistanceSpec::msm(c));
  return out;
}

std::vector<DistanceSpec> dd_dtw() {
  std::vector<DistanceSpec> out;
  for (int i = 0; i <= 100; ++i) out.push_back(DistanceSpec::dd_dtw(i / 100.0));
  return out;
}

std::vector<DistanceSpec> dtd_c() {
  std::vector<DistanceSpec> out;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; a + b <= 10; ++b) out.push_back(DistanceSpec::dtd_c(a / 10.0, b / 10.0));
  return out;
}

std::vector<DistanceSpec> lcss(const Dataset& train) {
  std::vector<double> pooled;
  for (const auto& s : train.all_series()) pooled.insert(pooled.end(), s.begin(), s.end());
  const double sigma = population_sd(pooled);
  std::vector<DistanceSpec> out;
  for (int e = 0; e < 10; ++e) {
    const double eps = sigma / 5.0 + e * (sigma - sigma / 5.0) / 9.0;
    for (int r = 0; r < 10; ++r) out.push_back(DistanceSpec::lcss(eps, 0.25 * r / 9.0));
  }
  return out;
}

std::vector<DistanceSpec> erp() {
  std::vector<DistanceSpec> out;
  for (int r = 0; r < 10; ++r) out.push_back(DistanceSpec::erp(0.0, 0.25 * r / 9.0));
  return out;
}

}  // namespace grids

NearestNeighbor::NearestNeighbor(std::string name, GridFactory grid, LoocvOptions options)
    : name_(std::move(name)), grid_(std::move(grid)), options_(options) {}

NearestNeighbor::NearestNeighbor(std::string name, DistanceSpec fixed, LoocvOptions options)
    : NearestNeighbor(std::move(name), [fixed](const Dataset&) { return std::vector{fixed}; },
                      options) {}

void NearestNeighbor::fit(const Dataset& train) {
  const auto grid = grid_(train);
  if (train.size() < 2) {
    set_model(train, grid.at(0), 0.0);
    return;
  }
  const auto sel = loocv_select(train, grid, options_);
  set_model(train, sel.best, sel.train_accuracy);
}

void NearestNeighbor::set_model(const Dataset& train, DistanceSpec spec, double train_accuracy) {
  spec_ = spec;
  train_accuracy_ = train_accuracy;
  class_count_ = train.class_count();
  labels_ = train.labels();
  train_.clear();
  train_.reserve(train.size());
  for (const auto& s : train.all_series()) train_.push_back(prepare(s, spec_));
}

int NearestNeighbor::predict(std::span<const double> series) const {
  if (train_.empty()) throw InputError("classifier is not fitted");
  if (series.size() != train_.front().raw.size())
    throw LengthError("query length differs from training length");
  const PreparedSeries q = prepare(series, spec_);
  double best = kInfinity;
  int label = labels_.front();
  for (std::size_t j = 0; j < train_.size(); ++j) {
    const double d = distance(spec_, q, train_[j], best);
    if (d < best) {
      best = d;
      label = labels_[j];
    }
  }
  return label;
}

std::vector<double> NearestNeighbor::distribution(std::span<const double> series) const {
  return one_hot(predict(series), class_count_);
}

CidNearestNeighbor::CidNearestNeighbor(LoocvOptions options)
    : NearestNeighbor("cid", [](const Dataset&) { return grids::dtw_windows(); }, options) {}

void CidNearestNeighbor::fit(const Dataset& train) {
  if (train.size() < 2) {
    set_model(train, DistanceSpec::cid(1.0), 0.0);
    return;
  }
  const auto windows = grid()(train);
  const auto dtw_sel = loocv_select(train, windows, options());
  const std::vector<DistanceSpec> chosen{DistanceSpec::cid(dtw_sel.best.window)};
  const auto sel = loocv_select(train, chosen, options());
  set_model(train, sel.best, sel.train_accuracy);
}

}  // namespace tsc
