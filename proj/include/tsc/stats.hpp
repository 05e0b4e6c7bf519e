#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tsc {

/// Ranks of one dataset's accuracies: 1 = highest, ties share the average.
std::vector<double> average_ranks(std::span<const double> accuracies);

struct FriedmanResult {
  double chi_square = 0.0;
  /// +inf when N(k-1) equals the chi-square statistic.
  double iman_davenport = 0.0;
  std::vector<double> mean_ranks;  // one per classifier
};

/// scores[j][i] is classifier j's mean accuracy on dataset i.
/// Throws ParameterError unless k >= 2 and N >= 2, SizeError on ragged rows.
FriedmanResult friedman_test(const std::vector<std::vector<double>>& scores);

/// Studentized range constant divided by sqrt(2), for 2 <= k <= 20 and alpha
/// 0.05 or 0.10. Throws ParameterError otherwise.
double nemenyi_q(std::size_t k, double alpha);
double nemenyi_cd(std::size_t k, std::size_t n, double alpha);

/// Two-sided signed-rank p-values over differences (zeros are dropped).
/// The exact version enumerates the null distribution of the tie-adjusted
/// ranks; the normal one applies tie variance and a 0.5 continuity shift.
double wilcoxon_exact(std::span<const double> differences);
double wilcoxon_normal(std::span<const double> differences);

/// Exact up to 20 non-zero differences, normal beyond. Fewer than 5 non-zero
/// differences throw InputError; none at all gives 1 with a warning.
double wilcoxon_signrank(std::span<const double> a, std::span<const double> b);

/// Two-sided binomial test on the signs of a - b, ties dropped.
double sign_test(std::span<const double> a, std::span<const double> b);

std::vector<double> differences(std::span<const double> a, std::span<const double> b);

}  // namespace tsc
