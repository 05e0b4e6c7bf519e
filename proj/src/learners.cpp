#include "tsc/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsc/classifier.hpp"
#include "tsc/error.hpp"
#include "tsc/parallel.hpp"

namespace tsc {

namespace {
constexpr double kVarianceFloor = 1e-6;
constexpr double kTau = 1e-12;
}  // namespace

void NaiveBayes::fit(const TabularDataset& data) {
  data.validate();
  if (data.size() == 0) throw InputError("naive Bayes needs training rows");
  class_count_ = data.class_count;
  width_ = data.width();
  const int c = class_count_;
  std::vector<double> count(c, 0.0);
  mean_.assign(c * width_, 0.0);
  var_.assign(c * width_, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int k = data.y[i];
    count[k] += 1.0;
    for (std::size_t j = 0; j < width_; ++j) mean_[k * width_ + j] += data.x.at(i, j);
  }
  for (int k = 0; k < c; ++k)
    for (std::size_t j = 0; j < width_; ++j)
      if (count[k] > 0) mean_[k * width_ + j] /= count[k];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int k = data.y[i];
    for (std::size_t j = 0; j < width_; ++j) {
      const double d = data.x.at(i, j) - mean_[k * width_ + j];
      var_[k * width_ + j] += d * d;
    }
  }
  log_prior_.assign(c, -std::numeric_limits<double>::infinity());
  for (int k = 0; k < c; ++k) {
    for (std::size_t j = 0; j < width_; ++j) {
      double& v = var_[k * width_ + j];
      v = count[k] > 0 ? v / count[k] : 0.0;
      v = std::max(v, kVarianceFloor);
    }
    if (count[k] > 0) log_prior_[k] = std::log(count[k] / static_cast<double>(data.size()));
  }
}

std::vector<double> NaiveBayes::distribution(std::span<const double> row) const {
  if (row.size() != width_) throw SizeError("feature row width differs from training width");
  const double log_two_pi = std::log(2.0 * std::acos(-1.0));
  std::vector<double> score(class_count_);
  for (int k = 0; k < class_count_; ++k) {
    double s = log_prior_[k];
    if (std::isfinite(s)) {
      for (std::size_t j = 0; j < width_; ++j) {
        const double v = var_[k * width_ + j];
        const double d = row[j] - mean_[k * width_ + j];
        s -= 0.5 * (log_two_pi + std::log(v) + d * d / v);
      }
    }
    score[k] = s;
  }
  const double top = *std::max_element(score.begin(), score.end());
  std::vector<double> out(class_count_, 0.0);
  if (!std::isfinite(top)) {
    std::fill(out.begin(), out.end(), 1.0 / class_count_);
    return out;
  }
  double total = 0.0;
  for (int k = 0; k < class_count_; ++k) total += out[k] = std::exp(score[k] - top);
  for (auto& v : out) v /= total;
  return out;
}

double polynomial_kernel(std::span<const double> a, std::span<const double> b, int degree) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::pow(dot + 1.0, degree);
}

void BinarySvm::fit(const FeatureMatrix& x, std::span<const int> sign, const SvmOptions& options) {
  const std::size_t n = x.rows();
  if (n != sign.size()) throw SizeError("labels and rows differ in count");
  if (n == 0) throw InputError("svm needs training rows");
  if (options.degree < 1) throw ParameterError("svm degree must be at least 1");
  options_ = options;
  const double C = options.c;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = sign[i] > 0 ? 1.0 : -1.0;

  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      K[i * n + j] = K[j * n + i] = polynomial_kernel(x.row(i), x.row(j), options.degree);
  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[i * n + j]; };

  alpha_.assign(n, 0.0);
  std::vector<double> G(n, -1.0);
  history_.clear();
  converged_ = false;
  iterations_ = 0;
  auto is_upper = [&](std::size_t t) { return alpha_[t] >= C; };
  auto is_lower = [&](std::size_t t) { return alpha_[t] <= 0.0; };

  while (iterations_ < options.max_iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      const bool up = y[t] > 0 ? !is_upper(t) : !is_lower(t);
      if (up && -y[t] * G[t] > gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const bool low = y[t] > 0 ? !is_lower(t) : !is_upper(t);
      if (!low) continue;
      gmax2 = std::max(gmax2, y[t] * G[t]);
      if (i == n) continue;
      const double grad_diff = gmax + y[t] * G[t];
      if (grad_diff > 0) {
        double quad = K[i * n + i] + K[t * n + t] - 2.0 * K[i * n + t];
        if (quad <= 0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj < obj_min) {
          obj_min = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < options.tolerance) {
      converged_ = true;
      break;
    }
    ++iterations_;
    const double old_i = alpha_[i], old_j = alpha_[j];
    if (y[i] != y[j]) {
      double quad = K[i * n + i] + K[j * n + j] + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha_[i] - alpha_[j];
      alpha_[i] += delta;
      alpha_[j] += delta;
      if (diff > 0) {
        if (alpha_[j] < 0) alpha_[j] = 0, alpha_[i] = diff;
      } else {
        if (alpha_[i] < 0) alpha_[i] = 0, alpha_[j] = -diff;
      }
      if (diff > 0) {
        if (alpha_[i] > C) alpha_[i] = C, alpha_[j] = C - diff;
      } else {
        if (alpha_[j] > C) alpha_[j] = C, alpha_[i] = C + diff;
      }
    } else {
      double quad = K[i * n + i] + K[j * n + j] - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha_[i] + alpha_[j];
      alpha_[i] -= delta;
      alpha_[j] += delta;
      if (sum > C) {
        if (alpha_[i] > C) alpha_[i] = C, alpha_[j] = sum - C;
      } else {
        if (alpha_[j] < 0) alpha_[j] = 0, alpha_[i] = sum;
      }
      if (sum > C) {
        if (alpha_[j] > C) alpha_[j] = C, alpha_[i] = sum - C;
      } else {
        if (alpha_[i] < 0) alpha_[i] = 0, alpha_[j] = sum;
      }
    }
    const double di = alpha_[i] - old_i, dj = alpha_[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) G[t] += Q(t, i) * di + Q(t, j) * dj;
    double w = 0.0;
    for (std::size_t t = 0; t < n; ++t) w += alpha_[t] * (1.0 - G[t]);
    history_.push_back(0.5 * w);
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  std::size_t free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (is_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      free_sum += yg;
    }
  }
  rho_ = free > 0 ? free_sum / static_cast<double>(free) : (ub + lb) / 2.0;

  std::vector<std::size_t> support;
  for (std::size_t t = 0; t < n; ++t)
    if (alpha_[t] > 0) support.push_back(t);
  support_ = x.select_rows(support);
  coef_.clear();
  for (auto t : support) coef_.push_back(alpha_[t] * y[t]);
}

double BinarySvm::decision(std::span<const double> row) const {
  double f = -rho_;
  for (std::size_t s = 0; s < coef_.size(); ++s)
    f += coef_[s] * polynomial_kernel(support_.row(s), row, options_.degree);
  return f;
}

void PolynomialSvm::fit(const TabularDataset& data) {
  data.validate();
  if (data.size() == 0) throw InputError("svm needs training rows");
  class_count_ = data.class_count;
  scale_.fit(data.x);
  const FeatureMatrix z = scale_.apply(data.x);
  models_.clear();
  only_class_ = -1;
  std::vector<std::vector<std::size_t>> by_class(class_count_);
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.y[i]].push_back(i);
  std::vector<int> present;
  for (int k = 0; k < class_count_; ++k)
    if (!by_class[k].empty()) present.push_back(k);
  if (present.size() == 1) {
    only_class_ = present.front();
    return;
  }
  for (std::size_t a = 0; a < present.size(); ++a) {
    for (std::size_t b = a + 1; b < present.size(); ++b) {
      std::vector<std::size_t> rows = by_class[present[a]];
      rows.insert(rows.end(), by_class[present[b]].begin(), by_class[present[b]].end());
      std::sort(rows.begin(), rows.end());
      std::vector<int> sign;
      for (auto r : rows) sign.push_back(data.y[r] == present[a] ? 1 : -1);
      Pair p{present[a], present[b], {}};
      p.svm.fit(z.select_rows(rows), sign, options_);
      models_.push_back(std::move(p));
    }
  }
}

std::vector<double> PolynomialSvm::distribution(std::span<const double> row) const {
  if (class_count_ == 0) throw InputError("svm is not fitted");
  if (only_class_ >= 0) return one_hot(only_class_, class_count_);
  const auto z = scale_.apply(row);
  std::vector<double> votes(class_count_, 0.0);
  for (const auto& p : models_) votes[p.svm.decision(z) >= 0.0 ? p.first : p.second] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(models_.size());
  return votes;
}

std::vector<double> Knn::scaled(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - lo_[j]) / range_[j];
  return out;
}

namespace {
double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

int vote(const std::vector<std::pair<double, std::size_t>>& order, std::size_t k,
         std::span<const int> labels, std::vector<double>& counts) {
  std::fill(counts.begin(), counts.end(), 0.0);
  for (std::size_t t = 0; t < k; ++t) counts[labels[order[t].second]] += 1.0;
  return argmax(counts);
}
}  // namespace

void Knn::fit(const TabularDataset& data) {
  data.validate();
  const std::size_t n = data.size(), f = data.width();
  if (n == 0) throw InputError("knn needs training rows");
  class_count_ = data.class_count;
  lo_.assign(f, std::numeric_limits<double>::infinity());
  std::vector<double> hi(f, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) {
      lo_[j] = std::min(lo_[j], data.x.at(i, j));
      hi[j] = std::max(hi[j], data.x.at(i, j));
    }
  range_.resize(f);
  for (std::size_t j = 0; j < f; ++j) range_[j] = hi[j] > lo_[j] ? hi[j] - lo_[j] : 1.0;
  x_ = FeatureMatrix(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = scaled(data.x.row(i));
    std::copy(s.begin(), s.end(), x_.row(i).begin());
  }
  y_ = data.y;

  const std::size_t kmax = std::max<std::size_t>(1, std::min(n / 2, max_k_));
  k_ = 1;
  if (n < 2) return;
  std::vector<std::size_t> correct(kmax + 1, 0);
  std::vector<double> counts(class_count_);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.emplace_back(squared_distance(x_.row(i), x_.row(j)), j);
    const std::size_t kk = std::min(kmax, order.size());
    std::partial_sort(order.begin(), order.begin() + kk, order.end());
    for (std::size_t k = 1; k <= kk; ++k) correct[k] += vote(order, k, y_, counts) == y_[i];
  }
  for (std::size_t k = 2; k <= kmax; ++k)
    if (correct[k] > correct[k_]) k_ = k;
}

std::vector<double> Knn::distribution(std::span<const double> row) const {
  if (y_.empty()) throw InputError("knn is not fitted");
  const auto q = scaled(row);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j = 0; j < y_.size(); ++j) order.emplace_back(squared_distance(q, x_.row(j)), j);
  const std::size_t kk = std::min(k_, order.size());
  std::partial_sort(order.begin(), order.begin() + kk, order.end());
  std::vector<double> counts(class_count_, 0.0);
  for (std::size_t t = 0; t < kk; ++t) counts[y_[order[t].second]] += 1.0 / static_cast<double>(kk);
  return counts;
}

std::vector<double> weighted_combination(std::span<const std::vector<double>> distributions,
                                         std::span<const double> weights) {
  if (distributions.size() != weights.size()) throw SizeError("one weight per member required");
  if (distributions.empty()) throw ParameterError("no ensemble members");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError("ensemble weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ParameterError("ensemble weights are all zero");
  std::vector<double> out(distributions.front().size(), 0.0);
  for (std::size_t m = 0; m < distributions.size(); ++m)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[m] * distributions[m][k];
  double mass = 0.0;
  for (double v : out) mass += v;
  for (auto& v : out) v /= mass;
  return out;
}

WeightedEnsemble::WeightedEnsemble(std::vector<std::unique_ptr<TabularClassifier>> members,
                                   std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
  if (members_.size() != weights_.size()) throw SizeError("one weight per member required");
  std::vector<std::vector<double>> probe(weights_.size(), std::vector<double>{1.0});
  weighted_combination(probe, weights_);  // validates weights
}

void WeightedEnsemble::fit(const TabularDataset& data) {
  for (auto& m : members_) m->fit(data);
}

std::vector<double> WeightedEnsemble::distribution(std::span<const double> row) const {
  std::vector<std::vector<double>> d;
  d.reserve(members_.size());
  for (const auto& m : members_) d.push_back(m->distribution(row));
  return weighted_combination(d, weights_);
}

void CvWeightedEnsemble::fit(const TabularDataset& data) {
  data.validate();
  if (factories_.empty()) throw ParameterError("no ensemble members");
  class_count_ = data.class_count;
  weights_.assign(factories_.size(), 0.0);
  members_.clear();
  members_.resize(factories_.size());
  parallel_for(factories_.size(), [&](std::size_t i) {
    weights_[i] = cross_validate(factories_[i], data, folds_, seed_);
    members_[i] = factories_[i]();
    members_[i]->fit(data);
  });
  vote_weights_ = weights_;
  if (std::all_of(weights_.begin(), weights_.end(), [](double w) { return w <= 0.0; }))
    vote_weights_.assign(weights_.size(), 1.0);
}

std::vector<double> CvWeightedEnsemble::distribution(std::span<const double> row) const {
  if (members_.empty()) throw InputError("ensemble is not fitted");
  std::vector<std::vector<double>> votes;
  votes.reserve(members_.size());
  for (const auto& m : members_) votes.push_back(one_hot(m->predict(row), class_count_));
  auto mass = weighted_combination(votes, vote_weights_);
  // Same rounding-tie snap as weighted_vote.
  const double top = *std::max_element(mass.begin(), mass.end());
  for (double& v : mass)
    if (top - v <= 1e-12) v = top;
  return mass;
}

}  // namespace tsc
