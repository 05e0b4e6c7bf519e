#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/dataset.hpp"

namespace tsc {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Whole-series distances. Pointwise cost is the squared difference except
// for MSM, whose move cost is |a_i - b_j|. All throw LengthError on unequal
// input lengths.

/// Sum of squared differences (no square root).
double euclidean(std::span<const double> a, std::span<const double> b,
                 double cutoff = kInfinity);

/// Integer half-width of the band |i - j| <= r*m.
std::size_t warping_band(double r, std::size_t m);

/// Banded DTW. Returns +inf once every cell of a row exceeds cutoff; any
/// value <= cutoff is exact.
double dtw(std::span<const double> a, std::span<const double> b, double r,
           double cutoff = kInfinity);

/// Weights w(k) = 1 / (1 + exp(-g (k - m/2))) for k = 0..m-1.
std::vector<double> wdtw_weights(std::size_t m, double g);

/// Full-window DTW with cell cost w(|i-j|) (a_i - b_j)^2.
double wdtw(std::span<const double> a, std::span<const double> b, double g,
            double cutoff = kInfinity);

/// 1 - LCSS/m, matching when |a_i - b_j| <= epsilon and |i - j| <= band(r).
double lcss(std::span<const double> a, std::span<const double> b, double epsilon, double r);

/// Edit distance with real penalty against gap value `gap`, banded by r.
double erp(std::span<const double> a, std::span<const double> b, double gap, double r);

/// Time warp edit distance, recursion evaluated as printed in the original
/// algorithm listing (including its edge-row handling of the stiffness term).
double twe(std::span<const double> a, std::span<const double> b, double nu, double lambda);

/// Move-split-merge distance with split/merge cost c.
double msm(std::span<const double> a, std::span<const double> b, double c);

/// Sum of squared first differences.
double complexity_estimate(std::span<const double> series);

/// max(c_a, c_b) / min(c_a, c_b) with the zero-complexity guards.
double complexity_correction(double ca, double cb);

using BaseDistance = std::function<double(std::span<const double>, std::span<const double>)>;

double cid(std::span<const double> a, std::span<const double> b, const BaseDistance& base);
double dd_dtw(std::span<const double> a, std::span<const double> b, double alpha,
              const BaseDistance& base);
/// Throws ParameterError unless alpha, beta >= 0 and alpha + beta <= 1.
double dtd_c(std::span<const double> a, std::span<const double> b, double alpha, double beta,
             const BaseDistance& base);

enum class DistanceKind { ED, DTW, DDTW, WDTW, WDDTW, LCSS, ERP, TWE, MSM, CID, DDdtw, DTDc };

/// A named measure with its parameters. Unused fields are ignored.
struct DistanceSpec {
  DistanceKind kind = DistanceKind::ED;
  double window = 1.0;   // dtw, ddtw, cid, lcss, erp
  double g = 0.0;        // wdtw/wddtw penalty, erp gap value
  double nu = 1.0;       // twe stiffness
  double lambda = 0.0;   // twe penalty
  double cost = 1.0;     // msm
  double alpha = 1.0;    // dddtw, dtdc
  double beta = 0.0;     // dtdc
  double epsilon = 0.0;  // lcss

  static DistanceSpec ed();
  static DistanceSpec dtw(double r);
  static DistanceSpec ddtw(double r);
  static DistanceSpec wdtw(double g);
  static DistanceSpec wddtw(double g);
  static DistanceSpec lcss(double epsilon, double r);
  static DistanceSpec erp(double gap, double r);
  static DistanceSpec twe(double nu, double lambda);
  static DistanceSpec msm(double c);
  static DistanceSpec cid(double r);
  static DistanceSpec dd_dtw(double alpha);
  static DistanceSpec dtd_c(double alpha, double beta);

  /// Canonical form, e.g. "dtw(r=0.10)", "msm(c=1)".
  std::string to_string() const;
  static DistanceSpec parse(std::string_view text);

  bool operator==(const DistanceSpec&) const = default;
};

/// Derived views of one series; only the views a measure needs are filled.
struct PreparedSeries {
  Series raw;
  Series diff;
  Series cosine;
  double complexity = 0.0;
};

PreparedSeries prepare(std::span<const double> series, const DistanceSpec& spec);

/// Distance under spec. cutoff enables early abandoning for measures that
/// support it; abandoned evaluations return +inf and are always > cutoff.
double distance(const DistanceSpec& spec, const PreparedSeries& a, const PreparedSeries& b,
                double cutoff = kInfinity);
double distance(const DistanceSpec& spec, std::span<const double> a, std::span<const double> b);

/// Which view a linear component reads.
enum class SeriesView { Raw, Diff, Cosine };

/// spec = sum weight_k * base_k(view_k(a), view_k(b)), with bases that are
/// single-view measures. CID is not linear and returns its DTW base alone;
/// callers apply complexity_correction afterwards.
struct DistanceComponent {
  double weight;
  DistanceSpec base;
  SeriesView view;
};
std::vector<DistanceComponent> linear_components(const DistanceSpec& spec);

}  // namespace tsc
