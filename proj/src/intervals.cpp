#include "tsc/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsc/distance.hpp"
#include "tsc/error.hpp"
#include "tsc/log.hpp"
#include "tsc/parallel.hpp"
#include "tsc/transforms.hpp"

namespace tsc {

IntervalStats interval_stats(std::span<const double> series, std::size_t start, std::size_t end) {
  if (!(start < end) || end >= series.size()) throw RangeError("interval outside series");
  const std::size_t n = end - start + 1;
  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t t = start; t <= end; ++t) sum += series[t];
  IntervalStats s;
  s.mean = sum / nd;
  const double tbar = (nd - 1.0) / 2.0;
  double ss = 0.0, sxy = 0.0, stt = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dx = series[start + t] - s.mean, dt = static_cast<double>(t) - tbar;
    ss += dx * dx;
    sxy += dt * dx;
    stt += dt * dt;
  }
  s.stdev = std::sqrt(ss / nd);
  s.slope = sxy / stt;
  return s;
}

namespace {

void push_stats(std::vector<double>& out, const IntervalStats& s) {
  out.push_back(s.mean);
  out.push_back(s.stdev);
  out.push_back(s.slope);
}

}  // namespace

void TimeSeriesForest::fit(const Dataset& train) {
  const std::size_t m = train.series_length(), p = options_.min_length;
  if (m < p + 2) throw ParameterError("series too short for the minimum interval length");
  if (options_.trees == 0) throw ParameterError("tsf needs at least one tree");
  class_count_ = train.class_count();
  const auto count = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(m))));
  trees_.assign(options_.trees, RandomTree{});
  intervals_.assign(options_.trees, {});
  parallel_for(options_.trees, [&](std::size_t t) {
    Rng rng(options_.seed + t);
    auto& iv = intervals_[t];
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t a = rng.index(m - p);                    // 0 .. m-1-p
      const std::size_t b = a + p + rng.index(m - a - p);        // a+p .. m-1
      iv.push_back({a, b});
    }
    TabularDataset table;
    table.class_count = class_count_;
    table.y = train.labels();
    for (std::size_t i = 0; i < train.size(); ++i) table.x.push_row(features(t, train.series(i)));
    std::vector<std::size_t> rows(train.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    trees_[t].fit(table, rows, TreeOptions{}, rng);
  });
}

std::vector<double> TimeSeriesForest::features(std::size_t tree, std::span<const double> series) const {
  std::vector<double> out;
  out.reserve(3 * intervals_[tree].size());
  for (const auto& iv : intervals_[tree]) push_stats(out, interval_stats(series, iv.start, iv.end));
  return out;
}

std::vector<double> TimeSeriesForest::distribution(std::span<const double> series) const {
  if (trees_.empty()) throw InputError("classifier is not fitted");
  std::vector<double> votes(class_count_, 0.0);
  for (std::size_t t = 0; t < trees_.size(); ++t) votes[trees_[t].predict(features(t, series))] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(trees_.size());
  return votes;
}

TsbfLayout tsbf_layout(std::size_t m, double z, std::size_t a) {
  if (a == 0) throw ParameterError("minimum interval length must be positive");
  TsbfLayout l;
  l.intervals = static_cast<std::size_t>(std::floor(z * static_cast<double>(m) / static_cast<double>(a)));
  l.min_length = l.intervals * a;
  const std::size_t blocks = m / a;
  l.subseries = blocks > l.intervals ? blocks - l.intervals : 0;
  if (l.intervals < 1 || l.subseries < 1) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", z);
    throw ParameterError(std::string("tsbf: z=") + buf + " gives no usable subseries for m=" +
                         std::to_string(m));
  }
  return l;
}

namespace {

FeatureMatrix subseries_rows(std::span<const double> series, const TsbfLayout& layout,
                             const std::vector<TimeSeriesBagOfFeatures::Subseries>& subs) {
  FeatureMatrix x;
  const std::size_t v = layout.intervals;
  std::vector<double> row;
  for (const auto& s : subs) {
    row.clear();
    for (std::size_t k = 0; k < v; ++k) {
      const std::size_t lo = s.start + k * s.length / v;
      const std::size_t hi = s.start + (k + 1) * s.length / v - 1;
      push_stats(row, interval_stats(series, lo, hi));
    }
    push_stats(row, interval_stats(series, s.start, s.start + s.length - 1));
    x.push_row(row);
  }
  return x;
}

std::vector<double> bag(std::span<const std::vector<double>> probabilities, int c, std::size_t b) {
  const std::size_t groups = static_cast<std::size_t>(c - 1);
  std::vector<double> out(b * groups + static_cast<std::size_t>(c), 0.0);
  for (const auto& p : probabilities) {
    for (std::size_t k = 0; k < groups; ++k) {
      const auto bin = std::min<std::size_t>(b - 1, static_cast<std::size_t>(std::floor(p[k] * b)));
      out[k * b + bin] += 1.0;
    }
    out[b * groups + argmax(p)] += 1.0;
  }
  for (std::size_t k = 0; k < static_cast<std::size_t>(c); ++k)
    out[b * groups + k] /= static_cast<double>(probabilities.size());
  return out;
}

}  // namespace

FeatureMatrix TimeSeriesBagOfFeatures::subseries_features(std::span<const double> series) const {
  return subseries_rows(series, layout_, subseries_);
}

std::vector<double> TimeSeriesBagOfFeatures::histogram(const FeatureMatrix& probabilities) const {
  std::vector<std::vector<double>> p;
  for (std::size_t r = 0; r < probabilities.rows(); ++r)
    p.emplace_back(probabilities.row(r).begin(), probabilities.row(r).end());
  return bag(p, class_count_, options_.bins);
}

void TimeSeriesBagOfFeatures::fit(const Dataset& train) {
  const std::size_t m = train.series_length(), n = train.size(), a = options_.min_interval;
  if (m < 2 * a) throw ParameterError("tsbf needs m >= 2a");
  if (options_.bins == 0) throw ParameterError("tsbf needs at least one bin");
  if (options_.z_grid.empty()) throw ParameterError("empty z grid");
  class_count_ = train.class_count();
  const int c = class_count_;
  oob_error_ = std::numeric_limits<double>::infinity();
  bool any = false;
  std::string last_error;
  for (std::size_t zi = 0; zi < options_.z_grid.size(); ++zi) {
    const double z = options_.z_grid[zi];
    TsbfLayout layout;
    try {
      layout = tsbf_layout(m, z, a);
    } catch (const ParameterError& e) {
      warn(e.what());
      last_error = e.what();
      continue;
    }
    Rng rng(options_.seed + 1000003ULL * zi);
    std::vector<Subseries> subs;
    for (std::size_t j = 0; j < layout.subseries; ++j) {
      const std::size_t len = layout.min_length + rng.index(m - layout.min_length + 1);
      subs.push_back({rng.index(m - len + 1), len});
    }
    TabularDataset one;
    one.class_count = c;
    std::vector<FeatureMatrix> per_series(n);
    parallel_for(n, [&](std::size_t i) { per_series[i] = subseries_rows(train.series(i), layout, subs); });
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < per_series[i].rows(); ++r) {
        one.x.push_row(per_series[i].row(r));
        one.y.push_back(train.label(i));
      }
    ForestOptions fo;
    fo.seed = options_.seed + 2 * zi;
    RandomForest first(fo);
    first.fit_incremental(one, options_.forest);

    TabularDataset two;
    two.class_count = c;
    two.y = train.labels();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::vector<double>> p;
      for (std::size_t j = 0; j < layout.subseries; ++j) p.push_back(first.oob_distribution(i * layout.subseries + j));
      two.x.push_row(bag(p, c, options_.bins));
    }
    ForestOptions so;
    so.seed = options_.seed + 2 * zi + 1;
    RandomForest second(so);
    second.fit_incremental(two, options_.forest);
    const double err = second.oob_error();
    const double score = std::isnan(err) ? 1.0 : err;
    if (!any || score < oob_error_) {
      any = true;
      oob_error_ = score;
      z_ = z;
      layout_ = layout;
      subseries_ = std::move(subs);
      stage_one_ = std::move(one);
      stage_two_ = std::move(two);
      first_ = std::move(first);
      second_ = std::move(second);
    }
  }
  if (!any) throw ParameterError(last_error);
}

std::vector<double> TimeSeriesBagOfFeatures::distribution(std::span<const double> series) const {
  if (subseries_.empty()) throw InputError("classifier is not fitted");
  const auto rows = subseries_features(series);
  std::vector<std::vector<double>> p;
  for (std::size_t r = 0; r < rows.rows(); ++r) p.push_back(first_.distribution(rows.row(r)));
  return second_.distribution(bag(p, class_count_, options_.bins));
}

std::string TimeSeriesBagOfFeatures::selected_params() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "z=%g;w=%zu;v=%zu;trees=%zu/%zu", z_, layout_.subseries,
                layout_.intervals, first_.tree_count(), second_.tree_count());
  return buf;
}

void LearnedPatternSimilarity::fit_depth(const Dataset& train, std::size_t depth) {
  const std::size_t m = train.series_length(), n = train.size(), w = options_.subseries;
  if (m < 10) throw ParameterError("lps needs series of length at least 10");
  if (w == 0 || options_.trees == 0) throw ParameterError("lps needs subseries and trees");
  class_count_ = train.class_count();
  labels_ = train.labels();
  depth_ = depth;
  const std::size_t min_len = m / 10, max_len = 9 * m / 10;
  std::vector<Series> diffs(n);
  for (std::size_t i = 0; i < n; ++i) diffs[i] = diff_transform(train.series(i));
  trees_.assign(options_.trees, Tree{});
  parallel_for(options_.trees, [&](std::size_t f) {
    Rng rng(options_.seed + f);
    Tree& t = trees_[f];
    t.length = min_len + rng.index(max_len - min_len + 1);
    const std::size_t e = t.length;
    for (std::size_t j = 0; j < w; ++j) t.raw_starts.push_back(rng.index(m - e + 1));
    for (std::size_t j = 0; j < w; ++j) t.diff_starts.push_back(rng.index(m - 1 - e + 1));
    FeatureMatrix x(n * e, 2 * w);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < e; ++r)
        for (std::size_t j = 0; j < w; ++j) {
          x.at(i * e + r, j) = train.series(i)[t.raw_starts[j] + r];
          x.at(i * e + r, w + j) = diffs[i][t.diff_starts[j] + r];
        }
    const std::size_t target = rng.index(2 * w);
    std::vector<double> y(n * e);
    for (std::size_t r = 0; r < y.size(); ++r) y[r] = x.at(r, target);
    t.tree.fit(x, y, depth, rng);
  });
  width_ = 0;
  for (auto& t : trees_) {
    t.offset = width_;
    width_ += t.tree.leaf_count();
  }
  train_counts_.assign(n, {});
  parallel_for(n, [&](std::size_t i) { train_counts_[i] = counts(train.series(i)); });
}

std::vector<double> LearnedPatternSimilarity::counts(std::span<const double> series) const {
  const auto d = diff_transform(series);
  std::vector<double> out(width_, 0.0);
  const std::size_t w = options_.subseries;
  std::vector<double> row(2 * w);
  for (const auto& t : trees_)
    for (std::size_t r = 0; r < t.length; ++r) {
      for (std::size_t j = 0; j < w; ++j) {
        row[j] = series[t.raw_starts[j] + r];
        row[w + j] = d[t.diff_starts[j] + r];
      }
      out[t.offset + t.tree.leaf_index(row)] += 1.0;
    }
  return out;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

void LearnedPatternSimilarity::fit(const Dataset& train) {
  if (options_.depths.empty()) throw ParameterError("empty depth grid");
  const std::size_t n = train.size();
  double best = -1.0;
  std::size_t best_depth = options_.depths.front();
  if (options_.depths.size() > 1 && n >= 2) {
    for (std::size_t d : options_.depths) {
      fit_depth(train, d);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double nearest = kInfinity;
        int label = -1;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double dist = squared_distance(train_counts_[i], train_counts_[j]);
          if (label < 0 || dist < nearest) nearest = dist, label = labels_[j];
        }
        correct += label == labels_[i];
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(n);
      if (acc > best) best = acc, best_depth = d;
    }
  }
  fit_depth(train, best_depth);
  train_accuracy_ = best < 0 ? std::numeric_limits<double>::quiet_NaN() : best;
}

std::vector<double> LearnedPatternSimilarity::distribution(std::span<const double> series) const {
  if (trees_.empty()) throw InputError("classifier is not fitted");
  const auto c = counts(series);
  double nearest = kInfinity;
  int label = labels_.front();
  for (std::size_t j = 0; j < train_counts_.size(); ++j) {
    const double d = squared_distance(c, train_counts_[j]);
    if (d < nearest) nearest = d, label = labels_[j];
  }
  return one_hot(label, class_count_);
}

}  // namespace tsc
