#include "tsc/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsc/error.hpp"
#include "tsc/log.hpp"

namespace tsc {

std::vector<double> average_ranks(std::span<const double> acc) {
  const std::size_t k = acc.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return acc[a] > acc[b]; });
  std::vector<double> ranks(k);
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && acc[order[j + 1]] == acc[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

FriedmanResult friedman_test(const std::vector<std::vector<double>>& scores) {
  const std::size_t k = scores.size();
  if (k < 2) throw ParameterError("friedman test needs at least 2 classifiers");
  const std::size_t n = scores[0].size();
  if (n < 2) throw ParameterError("friedman test needs at least 2 datasets");
  for (const auto& row : scores)
    if (row.size() != n) throw SizeError("every classifier needs one score per dataset");

  FriedmanResult out;
  out.mean_ranks.assign(k, 0.0);
  bool all_tied = true;
  std::vector<double> column(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) column[j] = scores[j][i];
    const auto r = average_ranks(column);
    for (std::size_t j = 0; j < k; ++j) {
      out.mean_ranks[j] += r[j];
      if (column[j] != column[0]) all_tied = false;
    }
  }
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  for (double& r : out.mean_ranks) r /= nd;
  if (all_tied) {
    warn("friedman test: every classifier ties on every dataset");
    return out;
  }
  double sum_sq = 0.0;
  for (double r : out.mean_ranks) sum_sq += r * r;
  out.chi_square = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  const double denom = nd * (kd - 1.0) - out.chi_square;
  out.iman_davenport = denom <= 0.0 ? std::numeric_limits<double>::infinity()
                                    : (nd - 1.0) * out.chi_square / denom;
  return out;
}

namespace {

// q_alpha for k = 2..20. k <= 10 as printed in the usual Nemenyi table,
// beyond that from the studentized range quantile (infinite df).
constexpr std::array<double, 19> kQ05 = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031,
                                         3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391,
                                         3.426, 3.458, 3.489, 3.517, 3.544};
constexpr std::array<double, 19> kQ10 = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780,
                                         2.855, 2.920, 2.978, 3.030, 3.077, 3.120, 3.159,
                                         3.196, 3.230, 3.261, 3.291, 3.319};

struct Ranked {
  std::vector<long> doubled;  // 2 * midrank, integral
  double w_plus = 0.0;
  std::size_t n = 0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
};

Ranked rank_differences(std::span<const double> d) {
  std::vector<double> mags;
  std::vector<bool> positive;
  for (double v : d)
    if (v != 0.0) {
      mags.push_back(std::abs(v));
      positive.push_back(v > 0.0);
    }
  Ranked r;
  r.n = mags.size();
  std::vector<std::size_t> order(r.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mags[a] < mags[b]; });
  r.doubled.assign(r.n, 0);
  for (std::size_t i = 0; i < r.n;) {
    std::size_t j = i;
    while (j + 1 < r.n && mags[order[j + 1]] == mags[order[i]]) ++j;
    const long twice = static_cast<long>(i + j + 2);  // 2 * ((i+1 + j+1) / 2)
    for (std::size_t t = i; t <= j; ++t) r.doubled[order[t]] = twice;
    const double t = static_cast<double>(j - i + 1);
    r.tie_term += t * t * t - t;
    i = j + 1;
  }
  for (std::size_t i = 0; i < r.n; ++i)
    if (positive[i]) r.w_plus += 0.5 * static_cast<double>(r.doubled[i]);
  return r;
}

}  // namespace

double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 20) throw ParameterError("nemenyi: k must be in [2, 20], got " + std::to_string(k));
  if (std::abs(alpha - 0.05) < 1e-9) return kQ05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-9) return kQ10[k - 2];
  throw ParameterError("nemenyi: alpha must be 0.05 or 0.1");
}

double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
  if (n < 1) throw ParameterError("nemenyi: N must be positive");
  const double kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

double wilcoxon_exact(std::span<const double> d) {
  const Ranked r = rank_differences(d);
  if (r.n == 0) return 1.0;
  // Subset-sum counts over doubled ranks; each sign pattern has mass 2^-n.
  const long total = std::accumulate(r.doubled.begin(), r.doubled.end(), 0L);
  std::vector<long double> count(static_cast<std::size_t>(total) + 1, 0.0L);
  count[0] = 1.0L;
  long reach = 0;
  for (long v : r.doubled) {
    for (long s = reach; s >= 0; --s)
      if (count[static_cast<std::size_t>(s)] != 0.0L)
        count[static_cast<std::size_t>(s + v)] += count[static_cast<std::size_t>(s)];
    reach += v;
  }
  const long w = std::lround(2.0 * r.w_plus);
  long double lower = 0.0L, upper = 0.0L, all = 0.0L;
  for (long s = 0; s <= total; ++s) {
    const long double c = count[static_cast<std::size_t>(s)];
    all += c;
    if (s <= w) lower += c;
    if (s >= w) upper += c;
  }
  const long double p = 2.0L * std::min(lower, upper) / all;
  return std::min(1.0, static_cast<double>(p));
}

double wilcoxon_normal(std::span<const double> d) {
  const Ranked r = rank_differences(d);
  if (r.n == 0) return 1.0;
  const double n = static_cast<double>(r.n);
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - r.tie_term / 48.0;
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

std::vector<double> differences(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LengthError("paired samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double wilcoxon_signrank(std::span<const double> a, std::span<const double> b) {
  const auto d = differences(a, b);
  const auto nonzero = static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](double v) { return v != 0.0; }));
  if (nonzero == 0) {
    warn("wilcoxon: all differences are zero");
    return 1.0;
  }
  if (nonzero < 5) throw InputError("wilcoxon needs at least 5 non-zero differences, got " + std::to_string(nonzero));
  return nonzero <= 20 ? wilcoxon_exact(d) : wilcoxon_normal(d);
}

double sign_test(std::span<const double> a, std::span<const double> b) {
  const auto d = differences(a, b);
  std::size_t pos = 0, neg = 0;
  for (double v : d) {
    if (v > 0.0) ++pos;
    if (v < 0.0) ++neg;
  }
  const std::size_t n = pos + neg;
  if (n == 0) {
    warn("sign test: all differences are zero");
    return 1.0;
  }
  const std::size_t tail = std::min(pos, neg);
  const double nd = static_cast<double>(n);
  long double mass = 0.0L;
  for (std::size_t i = 0; i <= tail; ++i) {
    const double id = static_cast<double>(i);
    const double log_c = std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0);
    mass += std::exp(static_cast<long double>(log_c) - static_cast<long double>(nd * std::log(2.0)));
  }
  return std::min(1.0, static_cast<double>(2.0L * mass));
}

}  // namespace tsc
