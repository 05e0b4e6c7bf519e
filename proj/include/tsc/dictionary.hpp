#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsc/classifier.hpp"
#include "tsc/learners.hpp"
#include "tsc/nn.hpp"

namespace tsc {

/// Means of l equal-width segments; when l does not divide the length a
/// point straddling two segments contributes to each in proportion.
/// Throws ParameterError unless 1 <= l <= length.
std::vector<double> paa(std::span<const double> series, std::size_t l);

/// The alpha-1 standard-normal quantiles at k/alpha. 2 <= alpha <= 16.
std::vector<double> sax_breakpoints(int alpha);

/// Word packed in base alpha, first symbol most significant.
using Word = std::uint64_t;

/// Symbol of a value: number of breakpoints <= value.
int sax_symbol(double value, std::span<const double> breakpoints);

struct SaxParams {
  std::size_t word_length = 4;
  int alphabet = 4;
  std::size_t window = 16;
  std::string to_string() const;
  bool operator==(const SaxParams&) const = default;
};

/// z-normalise the window (a constant window maps to the middle symbol),
/// reduce to word_length PAA means, discretise with the normal breakpoints.
Word sax_word(std::span<const double> window, std::size_t word_length, int alphabet);
std::vector<int> word_symbols(Word word, std::size_t length, int alphabet);
/// Letters 'a', 'b', ...
std::string render_word(Word word, std::size_t length, int alphabet);

/// Sparse word counts, sorted by word.
class WordHistogram {
 public:
  WordHistogram() = default;
  /// Counts words in order; with numerosity reduction a word equal to its
  /// predecessor in the sequence is not counted again.
  static WordHistogram from_words(std::span<const Word> words, bool numerosity_reduction = true);

  int get(Word word) const;
  const std::vector<std::pair<Word, int>>& entries() const noexcept { return entries_; }
  std::size_t total() const;
  bool empty() const noexcept { return entries_.empty(); }
  /// "series_id,word,count" lines.
  std::string dump(std::size_t series_id, std::size_t word_length, int alphabet) const;

 private:
  std::vector<std::pair<Word, int>> entries_;
};

/// SAX words of every window of length w (m - w + 1 of them).
std::vector<Word> sax_words(std::span<const double> series, const SaxParams& params);
WordHistogram sax_histogram(std::span<const double> series, const SaxParams& params,
                            bool numerosity_reduction = true);

/// Squared Euclidean distance over the union vocabulary.
double histogram_distance(const WordHistogram& a, const WordHistogram& b);
/// Sum over words u of a of (a[u] - b[u])^2.
double boss_distance(const WordHistogram& a, const WordHistogram& b);

/// SAX parameter grids: alphabet {2,4,6,8}, windows at 10..36% of m.
std::vector<SaxParams> bop_grid(std::size_t m);
std::vector<SaxParams> saxvsm_grid(std::size_t m);

/// Bag of patterns: 1-NN on SAX histograms, parameters by leave-one-out.
class Bop : public Classifier {
 public:
  explicit Bop(std::vector<SaxParams> grid = {}) : grid_(std::move(grid)) {}
  std::string name() const override { return "bop"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override { return params_.to_string(); }
  const SaxParams& params() const noexcept { return params_; }

 private:
  std::vector<SaxParams> grid_;
  SaxParams params_;
  double train_accuracy_ = 0.0;
  int class_count_ = 0;
  std::vector<WordHistogram> train_;
  std::vector<int> labels_;
};

/// Leave-one-out 1-NN accuracy over precomputed histograms.
double histogram_loocv(std::span<const WordHistogram> histograms, std::span<const int> labels,
                       double (*dist)(const WordHistogram&, const WordHistogram&));

/// tf-idf weight: log(1 + tf) * log(c / df), 0 when tf or df is 0.
double tfidf(double tf, double df, int class_count);

/// Per-class tf-idf vectors from class histograms.
std::vector<WordHistogram> class_histograms(std::span<const WordHistogram> series,
                                            std::span<const int> labels, int class_count);
std::vector<std::vector<std::pair<Word, double>>> tfidf_vectors(
    std::span<const WordHistogram> class_hist);
/// Class with the highest cosine similarity; an empty query returns 0 and
/// sets *empty_query.
int cosine_argmax(const WordHistogram& query,
                  const std::vector<std::vector<std::pair<Word, double>>>& classes,
                  bool* empty_query = nullptr);

class SaxVsm : public Classifier {
 public:
  explicit SaxVsm(std::vector<SaxParams> grid = {}) : grid_(std::move(grid)) {}
  std::string name() const override { return "saxvsm"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  int predict(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override { return params_.to_string(); }
  const SaxParams& params() const noexcept { return params_; }

 private:
  std::vector<SaxParams> grid_;
  SaxParams params_;
  double train_accuracy_ = 0.0;
  int class_count_ = 0;
  std::vector<std::vector<std::pair<Word, double>>> class_vectors_;
};

/// Equal-frequency breakpoints per coefficient column: row k holds alpha-1
/// non-decreasing cut values; a value <= cut falls in the lower bin.
/// Throws ParameterError with fewer rows than alpha.
std::vector<std::vector<double>> mcb_breakpoints(const std::vector<std::vector<double>>& coefficients,
                                                 int alpha);
int mcb_symbol(double value, std::span<const double> cuts);

/// First `count` real values (real, imaginary interleaved) of the DFT of a
/// window divided by its standard deviation; with mean removal the DC
/// coefficient is skipped.
std::vector<double> sfa_coefficients(std::span<const double> window, std::size_t count,
                                     bool mean_norm);

struct BossParams {
  std::size_t window = 10;
  std::size_t word_length = 8;
  bool mean_norm = true;
  std::string to_string() const;
};

/// One BOSS member: SFA histograms with MCB fitted on the training windows.
class BossModel {
 public:
  static constexpr int kAlphabet = 4;
  void fit(const Dataset& train, const BossParams& params);
  // One coefficient pass shared by several word lengths. Equivalent to
  // fitting each length separately since binning is per coefficient.
  static std::vector<BossModel> fit_lengths(const Dataset& train, std::size_t window, bool mean_norm,
                                            std::span<const std::size_t> lengths);
  WordHistogram transform(std::span<const double> series) const;
  int predict(std::span<const double> series) const;
  const std::vector<WordHistogram>& train_histograms() const noexcept { return train_; }
  const BossParams& params() const noexcept { return params_; }

 private:
  BossParams params_;
  std::vector<std::vector<double>> cuts_;
  std::vector<WordHistogram> train_;
  std::vector<int> labels_;
};

/// BOSS ensemble over window length, word length in {8,..,16} and mean
/// normalisation. Members within 0.92 of the best leave-one-out accuracy
/// are kept and vote with equal weight.
class BossEnsemble : public Classifier {
 public:
  static constexpr double kRetention = 0.92;
  std::string name() const override { return "boss"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override;
  std::size_t member_count() const noexcept { return members_.size(); }

  static std::vector<std::size_t> window_lengths(std::size_t m);

 private:
  std::vector<BossModel> members_;
  double train_accuracy_ = 0.0;
  int class_count_ = 0;
};

/// Feature rows for DTW_F: full-window DTW to every training case, DTW with
/// window r to every training case, then the dense alpha^l SAX histogram.
FeatureMatrix dtwf_transform(const Dataset& train, double r, const SaxParams& sax);
std::vector<double> dtwf_features(const Dataset& train, double r, const SaxParams& sax,
                                  std::span<const double> query);

/// DTW window and SAX parameters chosen by 1-NN leave-one-out, SVM degree
/// in {1,2,3} by 10-fold cross-validation of the feature table.
class DtwF : public Classifier {
 public:
  explicit DtwF(std::uint64_t seed = 0, LoocvOptions loocv = {}) : seed_(seed), loocv_(loocv) {}
  std::string name() const override { return "dtwf"; }
  void fit(const Dataset& train) override;
  std::vector<double> distribution(std::span<const double> series) const override;
  double train_accuracy() const override { return train_accuracy_; }
  std::string selected_params() const override;

 private:
  std::vector<double> features(std::span<const double> series) const;

  std::uint64_t seed_;
  LoocvOptions loocv_;
  double window_ = 0.0;
  SaxParams sax_;
  int degree_ = 1;
  double train_accuracy_ = 0.0;
  Dataset train_;
  std::vector<Word> columns_;  // histogram words kept as columns
  PolynomialSvm svm_;
};

}  // namespace tsc
