#pragma once

#include <span>

#include "tsc/dataset.hpp"

namespace tsc {

double mean(std::span<const double> values);

/// Population standard deviation (divides by n).
double population_sd(std::span<const double> values);

/// Zero mean, unit population variance. Constant series map to all zeros.
Series znormalize(std::span<const double> series);

Dataset znormalize(const Dataset& data);

/// out[i] = a[i] - a[i+1]; length m-1. Throws LengthError for m < 2.
Series diff_transform(std::span<const double> series);

/// c_i = sum_j a_j cos(pi/2 (j - 1/2)(i - 1)), i, j = 1..m.
Series cosine_transform(std::span<const double> series);

/// Lag-k autocorrelation for k = 1..max_lag, computed as the Pearson
/// correlation of x[0, m-k) with x[k, m). Always within [-1, 1]; a lag whose
/// head or tail segment is constant (always so at lag m-1) yields 0.
/// Requires 1 <= max_lag <= m-1.
Series acf_transform(std::span<const double> series, std::size_t max_lag);

/// Magnitudes |X_k| of the DFT for k = 1..floor(m/2). Entry i holds
/// frequency i+1; the DC term is excluded.
Series ps_transform(std::span<const double> series);

}  // namespace tsc
