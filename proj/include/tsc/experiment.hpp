#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "tsc/classifier.hpp"
#include "tsc/dataset.hpp"

namespace tsc {

struct ResultRecord {
  std::string classifier;
  std::string dataset;
  std::size_t fold = 0;
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;  // NaN when the classifier reports none
  std::string params;
  double train_ms = 0.0;
  /// Non-empty marks a failed fold; accuracies are then meaningless.
  std::string error;

  bool failed() const noexcept { return !error.empty(); }
};

/// At most one record per (classifier, dataset, fold). A later record for
/// the same key replaces an earlier one, so a retried failure overwrites
/// its error row.
class ResultsTable {
 public:
  static constexpr const char* kHeader = "classifier,dataset,fold,test_acc,train_acc,params,train_ms";

  /// Throws RangeError for accuracies outside [0,1] on successful rows.
  void add(ResultRecord record);
  const ResultRecord* find(const std::string& classifier, const std::string& dataset, std::size_t fold) const;
  bool has_success(const std::string& classifier, const std::string& dataset, std::size_t fold) const;

  /// Records ordered by (classifier, dataset, fold).
  std::vector<ResultRecord> records() const;
  std::size_t size() const noexcept { return rows_.size(); }
  std::vector<std::string> classifiers() const;
  std::vector<std::string> datasets() const;

  /// Mean test accuracy over the successful folds, if any.
  std::optional<double> mean_accuracy(const std::string& classifier, const std::string& dataset) const;
  /// Test accuracies keyed by fold, successful rows only.
  std::map<std::size_t, double> fold_accuracies(const std::string& classifier, const std::string& dataset) const;

  static std::string csv_row(const ResultRecord& record);
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  /// Missing file gives an empty table. Throws ParseError on a bad header or row.
  static ResultsTable read_csv(const std::filesystem::path& path);

 private:
  std::map<std::tuple<std::string, std::string, std::size_t>, ResultRecord> rows_;
};

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

struct ExperimentProblem {
  std::string name;
  Dataset train;
  Dataset test;
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const std::string&, std::uint64_t)>;

struct ExperimentOptions {
  std::size_t folds = 1;
  std::uint64_t seed = 0;
  /// When set, existing rows are loaded from here and each new row is
  /// appended as soon as it completes.
  std::optional<std::filesystem::path> out;
  /// Off writes train_ms = 0 so repeated runs give identical files.
  bool record_timing = true;
};

struct ExperimentReport {
  ResultsTable table;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  /// Partition hash used for each (classifier, dataset, fold) computed here.
  std::map<std::tuple<std::string, std::string, std::size_t>, std::uint64_t> partitions;
};

/// Every classifier on every problem and fold. Fold f uses the stratified
/// resample (seed, f), so fold 0 is the given split and all classifiers see
/// the same partitions. The classifier seed is seed + fold. Triples with a
/// successful row are skipped; a throwing fit or predict is stored as an
/// error row and the run carries on. Unknown classifier names propagate
/// the factory's ParameterError before any work starts.
ExperimentReport run_experiment(const std::vector<std::string>& classifiers,
                                const std::vector<ExperimentProblem>& problems, const ExperimentOptions& options,
                                const ClassifierFactory& factory = {});

/// Mean accuracies arranged as scores[classifier][dataset] for the stats
/// routines. Throws InputError listing every (classifier, dataset) hole.
std::vector<std::vector<double>> accuracy_grid(const ResultsTable& table, const std::vector<std::string>& classifiers,
                                               const std::vector<std::string>& datasets);

struct PairwiseSummary {
  std::size_t datasets = 0;
  std::size_t significantly_better = 0;
  std::size_t significantly_worse = 0;
  std::size_t no_difference = 0;
  double prop_better = 0.0;
  double mean_difference = 0.0;
};

/// Per shared dataset: two-sided Wilcoxon at level alpha over the shared
/// folds (fewer than 5 non-zero differences count as no difference). prop_better is the
/// share of datasets where the classifier is significantly higher; the mean
/// difference averages (classifier - benchmark) mean accuracies.
/// Throws InputError when no dataset has results for both.
PairwiseSummary pairwise_summary(const ResultsTable& table, const std::string& classifier,
                                 const std::string& benchmark, double alpha = 0.05);

/// "alpha,k,N,cd" header and values, then "classifier,mean_rank" rows in
/// rank order (name breaks ties).
std::string cd_diagram_csv(const std::vector<std::string>& classifiers, const std::vector<double>& mean_ranks,
                           std::size_t datasets, double alpha);

}  // namespace tsc
