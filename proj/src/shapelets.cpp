#include "tsc/shapelets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tsc/dictionary.hpp"
#include "tsc/error.hpp"
#include "tsc/log.hpp"
#include "tsc/parallel.hpp"
#include "tsc/rng.hpp"
#include "tsc/transforms.hpp"
#include "tsc/trees.hpp"

namespace tsc {

namespace {

constexpr double kFlat = 1e-12;

// Prefix sums in extended precision so window variances stay accurate on
// unnormalised data.
struct Prefix {
  std::vector<long double> s1, s2;
  explicit Prefix(std::span<const double> x) : s1(x.size() + 1, 0.0L), s2(x.size() + 1, 0.0L) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      s1[i + 1] = s1[i] + x[i];
      s2[i + 1] = s2[i] + static_cast<long double>(x[i]) * x[i];
    }
  }
};

// values must be z-normalised (or all zero for a flat subsequence).
double sdist_with(std::span<const double> values, std::span<const double> series, const Prefix& p) {
  const std::size_t l = values.size(), m = series.size();
  if (l == 0) throw LengthError("empty shapelet");
  if (l > m) throw LengthError("shapelet longer than series");
  double norm = 0.0, sum = 0.0;
  for (double v : values) norm += v * v, sum += v;
  const double ld = static_cast<double>(l);
  double best = kInfinity;
  for (std::size_t j = 0; j + l <= m; ++j) {
    const long double s1 = p.s1[j + l] - p.s1[j];
    const long double s2 = p.s2[j + l] - p.s2[j];
    const double mu = static_cast<double>(s1 / l);
    const long double var = std::max(0.0L, s2 / l - (s1 / l) * (s1 / l));
    const double sd = std::sqrt(static_cast<double>(var));
    double d;
    if (sd <= kFlat * std::max(1.0, std::fabs(mu))) {
      d = norm;
    } else {
      double dot = 0.0;
      for (std::size_t k = 0; k < l; ++k) dot += values[k] * series[j + k];
      d = norm + ld - 2.0 * (dot - mu * sum) / sd;
    }
    best = std::min(best, d);
  }
  return std::max(0.0, best / ld);
}

double entropy(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / total) * std::log2(c / total);
  return h;
}

}  // namespace

bool Shapelet::overlaps(const Shapelet& other) const noexcept {
  return source == other.source && start < other.start + other.length() &&
         other.start < start + length();
}

Shapelet make_shapelet(std::span<const double> series, std::size_t source, std::size_t start,
                       std::size_t length, int class_label) {
  if (length == 0 || start + length > series.size()) throw RangeError("shapelet outside series");
  Shapelet s;
  s.values = znormalize(series.subspan(start, length));
  s.source = source;
  s.start = start;
  s.class_label = class_label;
  return s;
}

double sdist(std::span<const double> subsequence, std::span<const double> series) {
  if (subsequence.size() > series.size()) throw LengthError("shapelet longer than series");
  const auto values = znormalize(subsequence);
  return sdist_with(values, series, Prefix(series));
}

double sdist(const Shapelet& shapelet, std::span<const double> series) {
  return sdist_with(shapelet.values, series, Prefix(series));
}

bool better(const SplitQuality& a, const SplitQuality& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  return a.gap > b.gap;
}

bool ranks_before(const Shapelet& a, const Shapelet& b) {
  return better({a.quality, 0.0, a.gap}, {b.quality, 0.0, b.gap});
}

SplitQuality best_split(std::span<const double> distances, std::span<const int> labels,
                        int class_count) {
  const std::size_t n = distances.size();
  if (labels.size() != n) throw SizeError("one label per distance required");
  SplitQuality out;
  if (n < 2) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  std::vector<double> total(class_count, 0.0), left(class_count, 0.0), right(class_count, 0.0);
  for (int y : labels) total[y] += 1.0;
  const double nd = static_cast<double>(n);
  const double base = entropy(total, nd);
  double sum_all = 0.0, sum_left = 0.0;
  for (double d : distances) sum_all += d;
  out.threshold = distances[order.back()];
  bool found = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left[labels[order[i]]] += 1.0;
    sum_left += distances[order[i]];
    const double a = distances[order[i]], b = distances[order[i + 1]];
    if (!(a < b)) continue;
    for (int k = 0; k < class_count; ++k) right[k] = total[k] - left[k];
    const double nl = static_cast<double>(i + 1), nr = nd - nl;
    SplitQuality cand;
    cand.gain = std::max(0.0, base - (nl / nd) * entropy(left, nl) - (nr / nd) * entropy(right, nr));
    cand.threshold = a + (b - a) / 2.0;
    cand.gap = (sum_all - sum_left) / nr - sum_left / nl;
    if (!found || better(cand, out)) out = cand, found = true;
  }
  return out;
}

double assess_candidate(std::span<const double> distances, std::span<const int> labels,
                        int target_class) {
  return assess_split(distances, labels, target_class).gain;
}

SplitQuality assess_split(std::span<const double> distances, std::span<const int> labels,
                          int target_class) {
  std::vector<int> binary(labels.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    binary[i] = labels[i] == target_class ? 1 : 0;
    hits += binary[i];
  }
  if (hits == 0 || hits == labels.size()) return {};
  return best_split(distances, binary, 2);
}

std::vector<Shapelet> remove_self_similar(std::vector<Shapelet> sorted) {
  std::vector<Shapelet> kept;
  for (auto& s : sorted)
    if (std::none_of(kept.begin(), kept.end(), [&](const Shapelet& k) { return k.overlaps(s); }))
      kept.push_back(std::move(s));
  return kept;
}

void merge_shapelets(std::vector<Shapelet>& selected, std::size_t quota,
                     std::vector<Shapelet> incoming) {
  if (incoming.empty()) return;
  const int cls = incoming.front().class_label;
  std::vector<Shapelet> pool, others;
  for (auto& s : selected) (s.class_label == cls ? pool : others).push_back(std::move(s));
  for (auto& s : incoming) pool.push_back(std::move(s));
  std::stable_sort(pool.begin(), pool.end(),
                   ranks_before);
  if (pool.size() > quota) pool.resize(quota);
  selected = std::move(others);
  for (auto& s : pool) selected.push_back(std::move(s));
}

std::vector<Shapelet> binary_shapelet_selection(const Dataset& train, const StOptions& options) {
  const std::size_t n = train.size(), m = train.series_length();
  const int c = train.class_count();
  if (n == 0) throw InputError("empty training set");
  std::size_t hi = options.max_length == 0 ? m - 1 : options.max_length;
  if (hi > m - 1) {
    warn("shapelet max length " + std::to_string(hi) + " clamped to " + std::to_string(m - 1));
    hi = m - 1;
  }
  const std::size_t lo = options.min_length;
  if (lo < 3 || lo > hi) throw ParameterError("shapelet lengths need 3 <= min <= max <= m - 1");
  const std::size_t k = options.k == 0 ? std::min<std::size_t>(10 * n, 1000) : options.k;
  if (k < static_cast<std::size_t>(c)) throw ParameterError("shapelet count k must be at least c");
  const std::size_t quota = k / static_cast<std::size_t>(c);
  const std::size_t step = options.length_step != 0 ? options.length_step : (m > 500 ? 2 : 1);
  const std::size_t stride = std::max<std::size_t>(1, options.position_stride);

  std::vector<Prefix> prefixes;
  prefixes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) prefixes.emplace_back(train.series(i));

  std::vector<std::pair<std::size_t, std::size_t>> all;  // (length, start)
  for (std::size_t l = lo; l <= hi; l += step)
    for (std::size_t j = 0; j + l <= m; j += stride) all.emplace_back(l, j);
  const std::size_t share =
      options.max_candidates == 0 ? all.size() : std::max<std::size_t>(1, options.max_candidates / n);

  std::vector<Shapelet> selected;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<std::pair<std::size_t, std::size_t>> cands = all;
    if (cands.size() > share) {
      Rng rng(options.seed + t);
      std::vector<std::size_t> idx(cands.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < share; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
      idx.resize(share);
      std::sort(idx.begin(), idx.end());
      std::vector<std::pair<std::size_t, std::size_t>> picked;
      for (std::size_t i : idx) picked.push_back(cands[i]);
      cands = std::move(picked);
    }
    const auto& series = train.series(t);
    const int cls = train.label(t);
    std::vector<Shapelet> r(cands.size());
    parallel_for(cands.size(), [&](std::size_t q) {
      Shapelet s = make_shapelet(series, t, cands[q].second, cands[q].first, cls);
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = sdist_with(s.values, train.series(i), prefixes[i]);
      const auto split = assess_split(d, train.labels(), cls);
      s.quality = split.gain;
      s.gap = split.gap;
      r[q] = std::move(s);
    });
    std::stable_sort(r.begin(), r.end(),
                     ranks_before);
    // Only the best quota survivors can ever enter the class list.
    std::vector<Shapelet> kept;
    for (auto& s : r) {
      if (kept.size() == quota) break;
      if (std::none_of(kept.begin(), kept.end(), [&](const Shapelet& o) { return o.overlaps(s); }))
        kept.push_back(std::move(s));
    }
    merge_shapelets(selected, quota, std::move(kept));
  }
  std::stable_sort(selected.begin(), selected.end(),
                   ranks_before);
  return selected;
}

std::vector<double> shapelet_features(std::span<const Shapelet> shapelets,
                                      std::span<const double> series) {
  const Prefix p(series);
  std::vector<double> out(shapelets.size());
  for (std::size_t j = 0; j < shapelets.size(); ++j) out[j] = sdist_with(shapelets[j].values, series, p);
  return out;
}

TabularDataset shapelet_transform(std::span<const Shapelet> shapelets, const Dataset& data) {
  if (shapelets.empty()) throw ParameterError("no shapelets to transform with");
  TabularDataset out;
  out.class_count = data.class_count();
  out.y = data.labels();
  out.x = FeatureMatrix(data.size(), shapelets.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const auto row = shapelet_features(shapelets, data.series(i));
    std::copy(row.begin(), row.end(), out.x.row(i).begin());
  });
  return out;
}

std::string shapelets_csv(std::span<const Shapelet> shapelets) {
  std::string out = "class,quality,source,start,length,values\n";
  char buf[64];
  for (const auto& s : shapelets) {
    std::snprintf(buf, sizeof buf, "%.17g", s.quality);
    out += std::to_string(s.class_label) + "," + buf + "," + std::to_string(s.source) + "," +
           std::to_string(s.start) + "," + std::to_string(s.length());
    for (double v : s.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<TabularFactory> transform_ensemble_members(std::uint64_t seed) {
  return {
      [] { return std::make_unique<Knn>(); },
      [] { return std::make_unique<NaiveBayes>(); },
      [seed] {
        ForestOptions f;
        f.trees = 500;
        f.seed = seed;
        return std::make_unique<RandomForest>(f);
      },
  };
}

void ShapeletTransformClassifier::fit(const Dataset& train) {
  shapelets_ = binary_shapelet_selection(train, options_);
  if (shapelets_.empty()) throw InputError("no shapelets found");
  const auto table = shapelet_transform(shapelets_, train);
  ensemble_ = std::make_unique<CvWeightedEnsemble>(transform_ensemble_members(options_.seed), 10,
                                                   options_.seed);
  ensemble_->fit(table);
  const auto& w = ensemble_->weights();
  train_accuracy_ = *std::max_element(w.begin(), w.end());
}

std::vector<double> ShapeletTransformClassifier::distribution(std::span<const double> series) const {
  if (!ensemble_) throw InputError("classifier is not fitted");
  return ensemble_->distribution(features(series));
}

std::string ShapeletTransformClassifier::selected_params() const {
  std::string out = "k=" + std::to_string(shapelets_.size()) + ";weights=";
  char buf[32];
  if (ensemble_)
    for (std::size_t i = 0; i < ensemble_->weights().size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.4f", i ? "/" : "", ensemble_->weights()[i]);
      out += buf;
    }
  return out;
}

namespace {

struct FsCandidate {
  Shapelet shapelet;
  SplitQuality split;
};

// Collision-count discriminability: per class, the gap between the rate of
// in-class and out-of-class series colliding with the word across all
// projections, summed over classes.
double collision_score(std::span<const double> counts, std::span<const double> class_sizes,
                       double projections) {
  double all = 0.0, n = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) all += counts[k], n += class_sizes[k];
  double score = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double in = class_sizes[k] > 0 ? counts[k] / (projections * class_sizes[k]) : 0.0;
    const double rest = n - class_sizes[k];
    const double out = rest > 0 ? (all - counts[k]) / (projections * rest) : 0.0;
    score += std::fabs(in - out);
  }
  return score;
}

FsCandidate fs_search(const Dataset& train, std::span<const std::size_t> rows,
                      const std::vector<Prefix>& prefixes, const FsOptions& o, Rng& rng) {
  const std::size_t m = train.series_length();
  const int c = train.class_count();
  std::vector<int> labels;
  std::vector<double> class_sizes(c, 0.0);
  for (std::size_t r : rows) {
    labels.push_back(train.label(r));
    class_sizes[train.label(r)] += 1.0;
  }
  FsCandidate best;
  best.split.gain = -1.0;
  const std::size_t hi = m > 2 ? m - 1 : m;
  const std::size_t lo = std::clamp<std::size_t>(o.min_length, 2, hi);
  for (std::size_t len = lo; len <= hi; len += std::max<std::size_t>(1, o.length_step)) {
    const std::size_t wl = std::min(o.word_length, len);
    // Distinct words per series, with the first place each word occurs.
    struct Occurrence {
      std::size_t row, start;
    };
    std::map<Word, Occurrence> first;
    std::vector<std::vector<Word>> words(rows.size());
    std::vector<std::vector<Word>> per_row(rows.size());
    parallel_for(rows.size(), [&](std::size_t q) {
      const auto& s = train.series(rows[q]);
      for (std::size_t j = 0; j + len <= m; ++j) per_row[q].push_back(sax_word(std::span(s).subspan(j, len), wl, o.alphabet));
    });
    for (std::size_t q = 0; q < rows.size(); ++q) {
      for (std::size_t j = 0; j < per_row[q].size(); ++j) first.try_emplace(per_row[q][j], Occurrence{q, j});
      words[q] = per_row[q];
      std::sort(words[q].begin(), words[q].end());
      words[q].erase(std::unique(words[q].begin(), words[q].end()), words[q].end());
    }
    std::map<Word, std::vector<double>> counts;
    for (const auto& [w, occ] : first) counts[w].assign(c, 0.0);
    for (int p = 0; p < o.projections; ++p) {
      std::vector<std::size_t> positions(wl);
      std::iota(positions.begin(), positions.end(), 0);
      rng.shuffle(std::span(positions));
      std::vector<bool> masked(wl, false);
      for (std::size_t i = 0; i < wl / 2; ++i) masked[positions[i]] = true;
      auto project = [&](Word w) {
        const auto sym = word_symbols(w, wl, o.alphabet);
        Word key = 0;
        for (std::size_t i = 0; i < wl; ++i)
          if (!masked[i]) key = key * o.alphabet + sym[i];
        return key;
      };
      std::map<Word, std::vector<std::size_t>> buckets;  // key -> rows holding it
      for (std::size_t q = 0; q < rows.size(); ++q) {
        Word prev = 0;
        bool have = false;
        std::vector<Word> keys;
        for (Word w : words[q]) keys.push_back(project(w));
        std::sort(keys.begin(), keys.end());
        for (Word key : keys) {
          if (have && key == prev) continue;
          buckets[key].push_back(q);
          prev = key, have = true;
        }
      }
      for (auto& [w, cnt] : counts)
        for (std::size_t q : buckets[project(w)]) cnt[labels[q]] += 1.0;
    }
    std::vector<std::pair<double, Word>> scored;
    for (const auto& [w, cnt] : counts)
      scored.emplace_back(collision_score(cnt, class_sizes, o.projections), w);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (scored.size() > o.top_k) scored.resize(o.top_k);
    std::vector<FsCandidate> evaluated(scored.size());
    parallel_for(scored.size(), [&](std::size_t i) {
      const auto occ = first.at(scored[i].second);
      const std::size_t src = rows[occ.row];
      FsCandidate cand;
      cand.shapelet = make_shapelet(train.series(src), src, occ.start, len, train.label(src));
      std::vector<double> d(rows.size());
      for (std::size_t q = 0; q < rows.size(); ++q)
        d[q] = sdist_with(cand.shapelet.values, train.series(rows[q]), prefixes[rows[q]]);
      cand.split = best_split(d, labels, c);
      cand.shapelet.quality = cand.split.gain;
      cand.shapelet.gap = cand.split.gap;
      evaluated[i] = std::move(cand);
    });
    for (auto& cand : evaluated)
      if (better(cand.split, best.split)) best = std::move(cand);
  }
  return best;
}

}  // namespace

void FastShapelets::fit(const Dataset& train) {
  if (train.empty()) throw InputError("empty training set");
  if (options_.projections < 1 || options_.top_k < 1) throw ParameterError("fs needs r >= 1 and k >= 1");
  class_count_ = train.class_count();
  nodes_.clear();
  std::vector<Prefix> prefixes;
  for (std::size_t i = 0; i < train.size(); ++i) prefixes.emplace_back(train.series(i));
  Rng rng(options_.seed);

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), 0);
  nodes_.emplace_back();
  stack.push_back({0, all});
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    std::vector<double> dist(class_count_, 0.0);
    for (std::size_t r : job.rows) dist[train.label(r)] += 1.0;
    const double total = static_cast<double>(job.rows.size());
    const bool pure = std::count_if(dist.begin(), dist.end(), [](double v) { return v > 0; }) <= 1;
    for (auto& v : dist) v /= total;
    nodes_[job.node].dist = dist;
    if (pure || job.rows.size() < 2) continue;

    auto best = fs_search(train, job.rows, prefixes, options_, rng);
    if (best.split.gain <= 1e-12) continue;
    std::vector<std::size_t> left, right;
    for (std::size_t r : job.rows)
      (sdist_with(best.shapelet.values, train.series(r), prefixes[r]) <= best.split.threshold ? left : right)
          .push_back(r);
    if (left.empty() || right.empty()) continue;
    const int l = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[job.node].shapelet = std::move(best.shapelet);
    nodes_[job.node].threshold = best.split.threshold;
    nodes_[job.node].left = l;
    nodes_[job.node].right = l + 1;
    stack.push_back({l + 1, std::move(right)});
    stack.push_back({l, std::move(left)});
  }
}

std::vector<double> FastShapelets::distribution(std::span<const double> series) const {
  if (nodes_.empty()) throw InputError("classifier is not fitted");
  int at = 0;
  while (nodes_[at].left >= 0)
    at = sdist(nodes_[at].shapelet, series) <= nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
  return nodes_[at].dist;
}

std::size_t FastShapelets::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.left < 0; }));
}

std::string FastShapelets::selected_params() const {
  return "nodes=" + std::to_string(nodes_.size()) + ";leaves=" + std::to_string(leaf_count());
}

}  // namespace tsc
