#include "tsc/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "tsc/error.hpp"

namespace tsc {
namespace {

constexpr double kConstantTolerance = 1e-12;

// FFTW planning is not thread safe; execution with private buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_sd(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

Series znormalize(std::span<const double> series) {
  Series out(series.size(), 0.0);
  const double mu = mean(series);
  const double sd = population_sd(series);
  if (sd <= kConstantTolerance * std::max(1.0, std::fabs(mu))) return out;
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - mu) / sd;
  return out;
}

Dataset znormalize(const Dataset& data) {
  return data.map_series([](const Series& s) { return znormalize(s); });
}

Series diff_transform(std::span<const double> series) {
  if (series.size() < 2) throw LengthError("diff_transform needs at least two observations");
  Series out(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) out[i] = series[i] - series[i + 1];
  return out;
}

Series cosine_transform(std::span<const double> series) {
  const std::size_t m = series.size();
  Series out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      sum += series[j] * std::cos(std::numbers::pi / 2.0 * (static_cast<double>(j) + 0.5) *
                                  static_cast<double>(i));
    out[i] = sum;
  }
  return out;
}

Series acf_transform(std::span<const double> series, std::size_t max_lag) {
  const std::size_t m = series.size();
  if (max_lag == 0 || max_lag >= m)
    throw ParameterError("acf max_lag must be in [1, m-1], got " + std::to_string(max_lag) +
                         " for m=" + std::to_string(m));
  Series out(max_lag, 0.0);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const std::size_t len = m - lag;
    auto head = series.subspan(0, len);
    auto tail = series.subspan(lag, len);
    const double mh = mean(head);
    const double mt = mean(tail);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double dx = head[t] - mh;
      const double dy = tail[t] - mt;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    const double denom = std::sqrt(sxx * syy);
    if (denom <= kConstantTolerance) continue;
    out[lag - 1] = std::clamp(sxy / denom, -1.0, 1.0);
  }
  return out;
}

Series ps_transform(std::span<const double> series) {
  const std::size_t m = series.size();
  if (m < 2) throw LengthError("ps_transform needs at least two observations");
  const std::size_t bins = m / 2;
  const std::size_t complex_count = m / 2 + 1;
  double* input = fftw_alloc_real(m);
  fftw_complex* output = fftw_alloc_complex(complex_count);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), input, output, FFTW_ESTIMATE);
  }
  std::copy(series.begin(), series.end(), input);
  fftw_execute(plan);
  Series out(bins);
  for (std::size_t k = 1; k <= bins; ++k) out[k - 1] = std::hypot(output[k][0], output[k][1]);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(input);
  fftw_free(output);
  return out;
}

}  // namespace tsc
