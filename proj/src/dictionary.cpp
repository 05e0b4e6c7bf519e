#include "tsc/dictionary.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "tsc/distance.hpp"
#include "tsc/error.hpp"
#include "tsc/log.hpp"
#include "tsc/parallel.hpp"

namespace tsc {

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Window statistics by two-pass summation.
std::pair<double, double> window_stats(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  const double mu = s / static_cast<double>(w.size());
  double q = 0.0;
  for (double v : w) q += (v - mu) * (v - mu);
  return {mu, std::sqrt(q / static_cast<double>(w.size()))};
}

bool is_constant(double mu, double sd) { return sd <= 1e-12 * std::max(1.0, std::fabs(mu)); }

}  // namespace

std::vector<double> paa(std::span<const double> series, std::size_t l) {
  const std::size_t n = series.size();
  if (l == 0 || l > n) throw ParameterError("paa needs 1 <= l <= length");
  std::vector<double> out(l, 0.0);
  if (n % l == 0) {
    const std::size_t step = n / l;
    for (std::size_t k = 0; k < l; ++k) {
      double s = 0.0;
      for (std::size_t t = 0; t < step; ++t) s += series[k * step + t];
      out[k] = s / static_cast<double>(step);
    }
    return out;
  }
  // Each point spans [t, t+1) scaled by l, segments are unit intervals of
  // the scaled axis [0, n*l) partitioned into l blocks of width n.
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t * l, hi = (t + 1) * l;
    std::size_t at = lo;
    while (at < hi) {
      const std::size_t seg = at / n;
      const std::size_t end = std::min(hi, (seg + 1) * n);
      out[seg] += series[t] * static_cast<double>(end - at);
      at = end;
    }
  }
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

std::vector<double> sax_breakpoints(int alpha) {
  if (alpha < 2 || alpha > 16) throw ParameterError("alphabet size must be in [2, 16]");
  const boost::math::normal_distribution<double> normal;
  std::vector<double> out;
  for (int k = 1; k < alpha; ++k) {
    double q = boost::math::quantile(normal, static_cast<double>(k) / alpha);
    if (2 * k == alpha) q = 0.0;
    out.push_back(q);
  }
  return out;
}

int sax_symbol(double value, std::span<const double> breakpoints) {
  return static_cast<int>(std::upper_bound(breakpoints.begin(), breakpoints.end(), value) -
                          breakpoints.begin());
}

std::string SaxParams::to_string() const {
  return "l=" + std::to_string(word_length) + ";a=" + std::to_string(alphabet) +
         ";w=" + std::to_string(window);
}

namespace {

void check_word_fits(std::size_t length, int alphabet) {
  if (static_cast<double>(length) * std::log2(static_cast<double>(alphabet)) > 63.0)
    throw ParameterError("word does not fit in 64 bits");
}

Word sax_word_with(std::span<const double> window, std::size_t l, int alphabet,
                   std::span<const double> bps) {
  const auto [mu, sd] = window_stats(window);
  const int middle = sax_symbol(0.0, bps);
  Word word = 0;
  if (is_constant(mu, sd)) {
    for (std::size_t k = 0; k < l; ++k) word = word * alphabet + middle;
    return word;
  }
  const auto means = paa(window, l);
  for (double v : means) word = word * alphabet + sax_symbol((v - mu) / sd, bps);
  return word;
}

}  // namespace

Word sax_word(std::span<const double> window, std::size_t word_length, int alphabet) {
  check_word_fits(word_length, alphabet);
  const auto bps = sax_breakpoints(alphabet);
  return sax_word_with(window, word_length, alphabet, bps);
}

std::vector<int> word_symbols(Word word, std::size_t length, int alphabet) {
  std::vector<int> out(length);
  for (std::size_t k = length; k-- > 0;) {
    out[k] = static_cast<int>(word % alphabet);
    word /= alphabet;
  }
  return out;
}

std::string render_word(Word word, std::size_t length, int alphabet) {
  std::string s;
  for (int sym : word_symbols(word, length, alphabet)) s += static_cast<char>('a' + sym);
  return s;
}

WordHistogram WordHistogram::from_words(std::span<const Word> words, bool numerosity_reduction) {
  std::vector<Word> kept;
  kept.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    if (!numerosity_reduction || i == 0 || words[i] != words[i - 1]) kept.push_back(words[i]);
  std::sort(kept.begin(), kept.end());
  WordHistogram h;
  for (std::size_t i = 0; i < kept.size();) {
    std::size_t j = i;
    while (j < kept.size() && kept[j] == kept[i]) ++j;
    h.entries_.emplace_back(kept[i], static_cast<int>(j - i));
    i = j;
  }
  return h;
}

int WordHistogram::get(Word word) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), word,
                             [](const auto& e, Word w) { return e.first < w; });
  return it != entries_.end() && it->first == word ? it->second : 0;
}

std::size_t WordHistogram::total() const {
  std::size_t t = 0;
  for (const auto& e : entries_) t += static_cast<std::size_t>(e.second);
  return t;
}

std::string WordHistogram::dump(std::size_t series_id, std::size_t word_length, int alphabet) const {
  std::string out;
  for (const auto& [w, c] : entries_)
    out += std::to_string(series_id) + "," + render_word(w, word_length, alphabet) + "," +
           std::to_string(c) + "\n";
  return out;
}

std::vector<Word> sax_words(std::span<const double> series, const SaxParams& params) {
  const std::size_t m = series.size(), w = params.window;
  if (w < params.word_length || w > m || w == 0)
    throw ParameterError("sax needs word_length <= window <= series length");
  check_word_fits(params.word_length, params.alphabet);
  const auto bps = sax_breakpoints(params.alphabet);
  std::vector<Word> words;
  words.reserve(m - w + 1);
  for (std::size_t j = 0; j + w <= m; ++j)
    words.push_back(sax_word_with(series.subspan(j, w), params.word_length, params.alphabet, bps));
  return words;
}

WordHistogram sax_histogram(std::span<const double> series, const SaxParams& params,
                            bool numerosity_reduction) {
  const auto words = sax_words(series, params);
  return WordHistogram::from_words(words, numerosity_reduction);
}

double histogram_distance(const WordHistogram& a, const WordHistogram& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      s += static_cast<double>(x[i].second) * x[i].second;
      ++i;
    } else if (i == x.size() || y[j].first < x[i].first) {
      s += static_cast<double>(y[j].second) * y[j].second;
      ++j;
    } else {
      const double d = x[i].second - y[j].second;
      s += d * d;
      ++i, ++j;
    }
  }
  return s;
}

double boss_distance(const WordHistogram& a, const WordHistogram& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  std::size_t j = 0;
  double s = 0.0;
  for (const auto& [word, count] : x) {
    while (j < y.size() && y[j].first < word) ++j;
    const double other = j < y.size() && y[j].first == word ? y[j].second : 0.0;
    s += (count - other) * (count - other);
  }
  return s;
}

namespace {

std::vector<std::size_t> sax_windows(std::size_t m) {
  std::vector<std::size_t> out;
  for (int pct : {10, 15, 20, 25, 30, 36}) {
    const std::size_t w = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(pct * static_cast<double>(m) / 100.0)), 2, m);
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
  return out;
}

}  // namespace

std::vector<SaxParams> bop_grid(std::size_t m) {
  std::vector<SaxParams> grid;
  for (int alpha : {2, 4, 6, 8})
    for (std::size_t w : sax_windows(m)) {
      std::vector<std::size_t> lengths;
      for (std::size_t l = 2; 2 * l <= w; l *= 2) lengths.push_back(l);
      if (lengths.empty()) lengths.push_back(std::min<std::size_t>(2, w));
      for (std::size_t l : lengths)
        if (static_cast<double>(l) * std::log2(static_cast<double>(alpha)) <= 63.0)
          grid.push_back({l, alpha, w});
    }
  return grid;
}

std::vector<SaxParams> saxvsm_grid(std::size_t m) {
  std::vector<SaxParams> grid;
  for (int alpha : {2, 4, 6, 8})
    for (std::size_t w : sax_windows(m))
      for (std::size_t l : {2, 4, 6, 8})
        if (l <= w) grid.push_back({l, alpha, w});
  return grid;
}

double histogram_loocv(std::span<const WordHistogram> histograms, std::span<const int> labels,
                       double (*dist)(const WordHistogram&, const WordHistogram&)) {
  const std::size_t n = histograms.size();
  if (n < 2) throw InputError("leave-one-out needs at least two cases");
  std::vector<int> predicted(n);
  parallel_for(n, [&](std::size_t i) {
    double best = kInfinity;
    int label = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = dist(histograms[i], histograms[j]);
      if (label < 0 || d < best) best = d, label = labels[j];
    }
    predicted[i] = label;
  });
  return accuracy(predicted, labels);
}

void Bop::fit(const Dataset& train) {
  class_count_ = train.class_count();
  labels_ = train.labels();
  auto grid = grid_.empty() ? bop_grid(train.series_length()) : grid_;
  double best = -1.0;
  std::vector<WordHistogram> best_hist;
  for (const auto& params : grid) {
    std::vector<WordHistogram> hist(train.size());
    parallel_for(train.size(), [&](std::size_t i) { hist[i] = sax_histogram(train.series(i), params); });
    const double acc = train.size() >= 2 ? histogram_loocv(hist, labels_, histogram_distance) : 0.0;
    if (acc > best) {
      best = acc;
      params_ = params;
      best_hist = std::move(hist);
    }
  }
  train_accuracy_ = best;
  train_ = std::move(best_hist);
}

std::vector<double> Bop::distribution(std::span<const double> series) const {
  if (train_.empty()) throw InputError("classifier is not fitted");
  const auto h = sax_histogram(series, params_);
  double best = kInfinity;
  int label = labels_.front();
  for (std::size_t j = 0; j < train_.size(); ++j) {
    const double d = histogram_distance(h, train_[j]);
    if (d < best) best = d, label = labels_[j];
  }
  return one_hot(label, class_count_);
}

double tfidf(double tf, double df, int class_count) {
  if (tf <= 0.0 || df <= 0.0) return 0.0;
  return std::log(1.0 + tf) * std::log(static_cast<double>(class_count) / df);
}

std::vector<WordHistogram> class_histograms(std::span<const WordHistogram> series,
                                            std::span<const int> labels, int class_count) {
  std::vector<std::vector<Word>> words(class_count);
  std::vector<std::map<Word, int>> counts(class_count);
  for (std::size_t i = 0; i < series.size(); ++i)
    for (const auto& [w, c] : series[i].entries()) counts[labels[i]][w] += c;
  std::vector<WordHistogram> out(class_count);
  for (int k = 0; k < class_count; ++k) {
    std::vector<Word> expanded;
    for (const auto& [w, c] : counts[k])
      for (int r = 0; r < c; ++r) expanded.push_back(w);
    out[k] = WordHistogram::from_words(expanded, false);
  }
  return out;
}

std::vector<std::vector<std::pair<Word, double>>> tfidf_vectors(
    std::span<const WordHistogram> class_hist) {
  const int c = static_cast<int>(class_hist.size());
  std::map<Word, int> df;
  for (const auto& h : class_hist)
    for (const auto& [w, count] : h.entries())
      if (count > 0) ++df[w];
  std::vector<std::vector<std::pair<Word, double>>> out(c);
  for (int k = 0; k < c; ++k)
    for (const auto& [w, count] : class_hist[k].entries()) {
      const double v = tfidf(count, df[w], c);
      if (v != 0.0) out[k].emplace_back(w, v);
    }
  return out;
}

int cosine_argmax(const WordHistogram& query,
                  const std::vector<std::vector<std::pair<Word, double>>>& classes,
                  bool* empty_query) {
  if (empty_query) *empty_query = query.empty();
  if (query.empty()) return 0;
  double qnorm = 0.0;
  for (const auto& [w, c] : query.entries()) qnorm += static_cast<double>(c) * c;
  qnorm = std::sqrt(qnorm);
  int best = 0;
  double best_sim = -kInfinity;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    double dot = 0.0, norm = 0.0;
    for (const auto& [w, v] : classes[k]) {
      norm += v * v;
      dot += v * query.get(w);
    }
    const double sim = norm > 0.0 ? dot / (qnorm * std::sqrt(norm)) : 0.0;
    if (sim > best_sim) best_sim = sim, best = static_cast<int>(k);
  }
  return best;
}

void SaxVsm::fit(const Dataset& train) {
  class_count_ = train.class_count();
  const auto& labels = train.labels();
  const std::size_t n = train.size();
  auto grid = grid_.empty() ? saxvsm_grid(train.series_length()) : grid_;
  double best = -1.0;
  std::vector<WordHistogram> best_classes;
  for (const auto& params : grid) {
    std::vector<WordHistogram> hist(n);
    parallel_for(n, [&](std::size_t i) { hist[i] = sax_histogram(train.series(i), params); });
    // Leave-one-out: class vectors rebuilt without the held-out series.
    std::vector<int> predicted(n);
    parallel_for(n, [&](std::size_t i) {
      std::vector<WordHistogram> rest;
      std::vector<int> rest_labels;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) rest.push_back(hist[j]), rest_labels.push_back(labels[j]);
      const auto vectors = tfidf_vectors(class_histograms(rest, rest_labels, class_count_));
      predicted[i] = cosine_argmax(hist[i], vectors);
    });
    const double acc = accuracy(predicted, labels);
    if (acc > best) {
      best = acc;
      params_ = params;
      best_classes = class_histograms(hist, labels, class_count_);
    }
  }
  train_accuracy_ = best;
  class_vectors_ = tfidf_vectors(best_classes);
}

int SaxVsm::predict(std::span<const double> series) const {
  if (class_vectors_.empty()) throw InputError("classifier is not fitted");
  bool empty = false;
  const int k = cosine_argmax(sax_histogram(series, params_), class_vectors_, &empty);
  if (empty) warn("saxvsm: query produced no words, predicting class 0");
  return k;
}

std::vector<double> SaxVsm::distribution(std::span<const double> series) const {
  return one_hot(predict(series), class_count_);
}

std::vector<std::vector<double>> mcb_breakpoints(const std::vector<std::vector<double>>& coefficients,
                                                 int alpha) {
  if (alpha < 2) throw ParameterError("alphabet size must be at least 2");
  const std::size_t n = coefficients.size();
  if (n < static_cast<std::size_t>(alpha))
    throw ParameterError("multiple coefficient binning needs at least alpha windows");
  const std::size_t l = coefficients.front().size();
  std::vector<std::vector<double>> cuts(l, std::vector<double>(alpha - 1));
  std::vector<double> column(n);
  for (std::size_t k = 0; k < l; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = coefficients[i][k];
    std::sort(column.begin(), column.end());
    for (int b = 1; b < alpha; ++b) {
      const std::size_t idx = static_cast<std::size_t>(b) * n / static_cast<std::size_t>(alpha);
      cuts[k][b - 1] = column[idx - 1] + (column[idx] - column[idx - 1]) / 2.0;
    }
  }
  return cuts;
}

int mcb_symbol(double value, std::span<const double> cuts) {
  // Lower bin when value <= cut.
  return static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

namespace {

struct DftTable {
  std::size_t w = 0;
  std::size_t first = 0;
  std::size_t pairs = 0;
  std::vector<double> cosines, sines;  // pairs x w
};

DftTable make_table(std::size_t w, std::size_t count, bool mean_norm) {
  DftTable t;
  t.w = w;
  t.first = mean_norm ? 1 : 0;
  t.pairs = (count + 1) / 2;
  const double pi = std::acos(-1.0);
  t.cosines.resize(t.pairs * w);
  t.sines.resize(t.pairs * w);
  for (std::size_t p = 0; p < t.pairs; ++p) {
    const std::size_t k = t.first + p;
    for (std::size_t s = 0; s < w; ++s) {
      const double angle = 2.0 * pi * static_cast<double>((k * s) % w) / static_cast<double>(w);
      t.cosines[p * w + s] = std::cos(angle);
      t.sines[p * w + s] = -std::sin(angle);
    }
  }
  return t;
}

void coefficients_with(std::span<const double> window, const DftTable& t, std::size_t count,
                       double* out) {
  const auto [mu, sd] = window_stats(window);
  const double scale = sd > 1e-8 ? 1.0 / sd : 1.0;
  for (std::size_t p = 0; p < t.pairs; ++p) {
    double re = 0.0, im = 0.0;
    for (std::size_t s = 0; s < t.w; ++s) {
      re += window[s] * t.cosines[p * t.w + s];
      im += window[s] * t.sines[p * t.w + s];
    }
    if (2 * p < count) out[2 * p] = re * scale;
    if (2 * p + 1 < count) out[2 * p + 1] = im * scale;
  }
}

// Coefficients of every window of a series, row-major (windows x count).
std::vector<double> window_coefficients(std::span<const double> series, const DftTable& t,
                                        std::size_t count) {
  const std::size_t windows = series.size() - t.w + 1;
  std::vector<double> out(windows * count);
  for (std::size_t j = 0; j < windows; ++j)
    coefficients_with(series.subspan(j, t.w), t, count, out.data() + j * count);
  return out;
}

WordHistogram sfa_histogram(const std::vector<double>& coeffs, std::size_t count, std::size_t l,
                            const std::vector<std::vector<double>>& cuts) {
  const std::size_t windows = coeffs.size() / count;
  std::vector<Word> words(windows);
  for (std::size_t j = 0; j < windows; ++j) {
    Word word = 0;
    for (std::size_t k = 0; k < l; ++k)
      word = word * BossModel::kAlphabet + mcb_symbol(coeffs[j * count + k], cuts[k]);
    words[j] = word;
  }
  return WordHistogram::from_words(words, true);
}

}  // namespace

std::vector<double> sfa_coefficients(std::span<const double> window, std::size_t count,
                                     bool mean_norm) {
  const auto t = make_table(window.size(), count, mean_norm);
  std::vector<double> out(count);
  coefficients_with(window, t, count, out.data());
  return out;
}

std::string BossParams::to_string() const {
  return "w=" + std::to_string(window) + ";l=" + std::to_string(word_length) +
         ";p=" + (mean_norm ? "1" : "0");
}

void BossModel::fit(const Dataset& train, const BossParams& params) {
  const std::size_t l = params.word_length;
  *this = std::move(fit_lengths(train, params.window, params.mean_norm, std::span(&l, 1)).front());
}

std::vector<BossModel> BossModel::fit_lengths(const Dataset& train, std::size_t window,
                                              bool mean_norm, std::span<const std::size_t> lengths) {
  if (window > train.series_length() || window < 2)
    throw ParameterError("boss window must be in [2, m]");
  if (lengths.empty()) throw ParameterError("no word lengths given");
  const std::size_t count = *std::max_element(lengths.begin(), lengths.end());
  if (*std::min_element(lengths.begin(), lengths.end()) == 0 || count > 2 * window)
    throw ParameterError("boss word length out of range");
  const auto table = make_table(window, count, mean_norm);
  std::vector<std::vector<double>> per_series(train.size());
  parallel_for(train.size(),
               [&](std::size_t i) { per_series[i] = window_coefficients(train.series(i), table, count); });
  std::vector<std::vector<double>> rows;
  for (const auto& c : per_series)
    for (std::size_t j = 0; j < c.size() / count; ++j)
      rows.emplace_back(c.begin() + j * count, c.begin() + (j + 1) * count);
  const auto cuts = mcb_breakpoints(rows, kAlphabet);

  std::vector<BossModel> out;
  for (std::size_t l : lengths) {
    BossModel model;
    model.params_ = {window, l, mean_norm};
    model.labels_ = train.labels();
    model.cuts_.assign(cuts.begin(), cuts.begin() + l);
    model.train_.resize(train.size());
    for (std::size_t i = 0; i < train.size(); ++i)
      model.train_[i] = sfa_histogram(per_series[i], count, l, model.cuts_);
    out.push_back(std::move(model));
  }
  return out;
}

WordHistogram BossModel::transform(std::span<const double> series) const {
  const std::size_t count = params_.word_length;
  const auto table = make_table(params_.window, count, params_.mean_norm);
  return sfa_histogram(window_coefficients(series, table, count), count, count, cuts_);
}

int BossModel::predict(std::span<const double> series) const {
  if (train_.empty()) throw InputError("classifier is not fitted");
  const auto h = transform(series);
  double best = kInfinity;
  int label = labels_.front();
  for (std::size_t j = 0; j < train_.size(); ++j) {
    const double d = boss_distance(h, train_[j]);
    if (d < best) best = d, label = labels_[j];
  }
  return label;
}

std::vector<std::size_t> BossEnsemble::window_lengths(std::size_t m) {
  const std::size_t lo = std::min<std::size_t>(10, m);
  const auto count = static_cast<std::size_t>(std::floor(std::min(200.0, std::sqrt(static_cast<double>(m)))));
  std::vector<std::size_t> out;
  if (count <= 1 || m <= lo) return {lo};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t w = lo + static_cast<std::size_t>(std::lround(
                                   static_cast<double>(k) * static_cast<double>(m - lo) /
                                   static_cast<double>(count - 1)));
    if (out.empty() || out.back() != w) out.push_back(w);
  }
  return out;
}

void BossEnsemble::fit(const Dataset& train) {
  class_count_ = train.class_count();
  const std::size_t m = train.series_length();
  const auto windows = window_lengths(m);
  struct Setting {
    std::size_t window;
    bool mean_norm;
  };
  std::vector<Setting> settings;
  for (bool p : {true, false})
    for (std::size_t w : windows) settings.push_back({w, p});

  const std::vector<std::size_t> lengths{8, 10, 12, 14, 16};
  std::vector<std::vector<BossModel>> models(settings.size());
  std::vector<std::vector<double>> accs(settings.size());
  parallel_for(settings.size(), [&](std::size_t s) {
    const auto [w, p] = settings[s];
    models[s] = BossModel::fit_lengths(train, w, p, lengths);
    for (const auto& member : models[s])
      accs[s].push_back(train.size() >= 2
                            ? histogram_loocv(member.train_histograms(), train.labels(), boss_distance)
                            : 0.0);
  });
  double best = 0.0;
  for (const auto& a : accs)
    for (double v : a) best = std::max(best, v);
  members_.clear();
  for (std::size_t s = 0; s < settings.size(); ++s)
    for (std::size_t k = 0; k < models[s].size(); ++k)
      if (accs[s][k] >= kRetention * best) members_.push_back(std::move(models[s][k]));
  train_accuracy_ = best;
}

std::vector<double> BossEnsemble::distribution(std::span<const double> series) const {
  if (members_.empty()) throw InputError("classifier is not fitted");
  std::vector<double> votes(class_count_, 0.0);
  std::vector<int> predicted(members_.size());
  parallel_for(members_.size(), [&](std::size_t k) { predicted[k] = members_[k].predict(series); });
  for (int p : predicted) votes[p] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(members_.size());
  return votes;
}

std::string BossEnsemble::selected_params() const {
  return "members=" + std::to_string(members_.size());
}

FeatureMatrix dtwf_transform(const Dataset& train, double r, const SaxParams& sax) {
  const std::size_t n = train.size();
  const double width = std::pow(static_cast<double>(sax.alphabet), static_cast<double>(sax.word_length));
  if (width > static_cast<double>(1u << 20)) throw SizeError("dense histogram block too wide");
  const std::size_t words = static_cast<std::size_t>(width);
  FeatureMatrix z(n, 2 * n + words, 0.0);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double full = dtw(train.series(i), train.series(j), 1.0);
      const double banded = dtw(train.series(i), train.series(j), r);
      z.at(i, j) = full;
      z.at(j, i) = full;
      z.at(i, n + j) = banded;
      z.at(j, n + i) = banded;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = sax_histogram(train.series(i), sax);
    for (const auto& [w, c] : h.entries()) z.at(i, 2 * n + w) = c;
  }
  return z;
}

std::vector<double> dtwf_features(const Dataset& train, double r, const SaxParams& sax,
                                  std::span<const double> query) {
  const std::size_t n = train.size();
  const auto words = static_cast<std::size_t>(
      std::pow(static_cast<double>(sax.alphabet), static_cast<double>(sax.word_length)));
  std::vector<double> out(2 * n + words, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = dtw(query, train.series(j), 1.0);
    out[n + j] = dtw(query, train.series(j), r);
  }
  const auto h = sax_histogram(query, sax);
  for (const auto& [w, c] : h.entries()) out[2 * n + w] = c;
  return out;
}

std::vector<double> DtwF::features(std::span<const double> series) const {
  const std::size_t n = train_.size();
  std::vector<double> out(2 * n + columns_.size(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = dtw(series, train_.series(j), 1.0);
    out[n + j] = dtw(series, train_.series(j), window_);
  }
  const auto h = sax_histogram(series, sax_);
  for (std::size_t k = 0; k < columns_.size(); ++k) out[2 * n + k] = h.get(columns_[k]);
  return out;
}

void DtwF::fit(const Dataset& train) {
  train_ = train;
  const std::size_t n = train.size();
  if (n < 2) throw InputError("dtwf needs at least two training cases");
  const auto windows = grids::dtw_windows();
  window_ = loocv_select(train, windows, loocv_).best.window;
  Bop bop;
  bop.fit(train);
  sax_ = bop.params();

  // Histogram columns: only words seen in training. Columns that are zero
  // on every training row contribute nothing to any kernel value.
  std::vector<WordHistogram> hist(n);
  std::set<Word> seen;
  for (std::size_t i = 0; i < n; ++i) {
    hist[i] = sax_histogram(train.series(i), sax_);
    for (const auto& [w, c] : hist[i].entries()) seen.insert(w);
  }
  columns_.assign(seen.begin(), seen.end());

  TabularDataset table;
  table.class_count = train.class_count();
  table.y = train.labels();
  table.x = FeatureMatrix(n, 2 * n + columns_.size(), 0.0);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double full = dtw(train.series(i), train.series(j), 1.0);
      const double banded = dtw(train.series(i), train.series(j), window_);
      table.x.at(i, j) = full;
      table.x.at(j, i) = full;
      table.x.at(i, n + j) = banded;
      table.x.at(j, n + i) = banded;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < columns_.size(); ++k) table.x.at(i, 2 * n + k) = hist[i].get(columns_[k]);

  double best = -1.0;
  for (int s : {1, 2, 3}) {
    SvmOptions options;
    options.degree = s;
    const double acc = cross_validate([options] { return std::make_unique<PolynomialSvm>(options); },
                                      table, 10, seed_);
    if (acc > best) best = acc, degree_ = s;
  }
  train_accuracy_ = best;
  SvmOptions options;
  options.degree = degree_;
  svm_ = PolynomialSvm(options);
  svm_.fit(table);
}

std::vector<double> DtwF::distribution(std::span<const double> series) const {
  if (train_.empty()) throw InputError("classifier is not fitted");
  return svm_.distribution(features(series));
}

std::string DtwF::selected_params() const {
  return "r=" + format_number(window_) + ";" + sax_.to_string() + ";s=" + std::to_string(degree_);
}

}  // namespace tsc
