#include "tsc/distance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "tsc/error.hpp"
#include "tsc/transforms.hpp"

namespace tsc {
namespace {

void require_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw LengthError("series lengths differ: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  if (a.empty()) throw LengthError("distance of empty series");
}

inline double sq(double x) { return x * x; }

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b, double cutoff) {
  require_equal(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += sq(a[i] - b[i]);
    if (sum > cutoff) return kInfinity;
  }
  return sum;
}

std::size_t warping_band(double r, std::size_t m) {
  if (r <= 0.0) return 0;
  const double width = std::floor(r * static_cast<double>(m) + 1e-9);
  return std::min<std::size_t>(m, static_cast<std::size_t>(width));
}

namespace {

// Shared banded DP over cell costs cost(i, j), 0-based.
template <typename Cost>
double banded_warp(std::size_t m, std::size_t band, double cutoff, Cost&& cost) {
  std::vector<double> prev(m + 1, kInfinity), curr(m + 1, kInfinity);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t lo = i > band ? i - band : 1;
    const std::size_t hi = std::min(m, i + band);
    curr[lo - 1] = kInfinity;
    double row_min = kInfinity;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double best = std::min({prev[j - 1], prev[j], curr[j - 1]});
      const double value = best + cost(i - 1, j - 1);
      curr[j] = value;
      row_min = std::min(row_min, value);
    }
    if (hi < m) curr[hi + 1] = kInfinity;
    if (row_min > cutoff) return kInfinity;
    std::swap(prev, curr);
    prev[0] = kInfinity;
  }
  return prev[m];
}

}  // namespace

double dtw(std::span<const double> a, std::span<const double> b, double r, double cutoff) {
  require_equal(a, b);
  const std::size_t m = a.size();
  return banded_warp(m, warping_band(r, m), cutoff,
                     [&](std::size_t i, std::size_t j) { return sq(a[i] - b[j]); });
}

std::vector<double> wdtw_weights(std::size_t m, double g) {
  std::vector<double> w(m);
  const double half = static_cast<double>(m) / 2.0;
  for (std::size_t k = 0; k < m; ++k)
    w[k] = 1.0 / (1.0 + std::exp(-g * (static_cast<double>(k) - half)));
  return w;
}

double wdtw(std::span<const double> a, std::span<const double> b, double g, double cutoff) {
  require_equal(a, b);
  const std::size_t m = a.size();
  const auto w = wdtw_weights(m, g);
  return banded_warp(m, m, cutoff, [&](std::size_t i, std::size_t j) {
    return w[i > j ? i - j : j - i] * sq(a[i] - b[j]);
  });
}

double lcss(std::span<const double> a, std::span<const double> b, double epsilon, double r) {
  require_equal(a, b);
  const std::size_t m = a.size();
  const std::size_t band = warping_band(r, m);
  std::vector<std::size_t> prev(m + 1, 0), curr(m + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    curr[0] = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t offset = i > j ? i - j : j - i;
      if (offset <= band && std::fabs(a[i - 1] - b[j - 1]) <= epsilon)
        curr[j] = prev[j - 1] + 1;
      else
        curr[j] = std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return 1.0 - static_cast<double>(prev[m]) / static_cast<double>(m);
}

double erp(std::span<const double> a, std::span<const double> b, double gap, double r) {
  require_equal(a, b);
  const std::size_t m = a.size();
  const std::size_t band = warping_band(r, m);
  std::vector<double> prev(m + 1, kInfinity), curr(m + 1, kInfinity);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= std::min(m, band); ++j) prev[j] = prev[j - 1] + sq(b[j - 1] - gap);
  for (std::size_t i = 1; i <= m; ++i) {
    std::fill(curr.begin(), curr.end(), kInfinity);
    if (i <= band) curr[0] = prev[0] + sq(a[i - 1] - gap);
    const std::size_t lo = i > band ? i - band : 1;
    const std::size_t hi = std::min(m, i + band);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double match = prev[j - 1] + sq(a[i - 1] - b[j - 1]);
      const double del = prev[j] + sq(a[i - 1] - gap);
      const double ins = curr[j - 1] + sq(b[j - 1] - gap);
      curr[j] = std::min({match, del, ins});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

double twe(std::span<const double> a, std::span<const double> b, double nu, double lambda) {
  require_equal(a, b);
  const std::size_t m = a.size();
  // 1-based views with a_0 = b_0 = 0.
  auto A = [&](std::size_t k) { return k == 0 ? 0.0 : a[k - 1]; };
  auto B = [&](std::size_t k) { return k == 0 ? 0.0 : b[k - 1]; };
  // Row arrays indexed by matrix column j = 1..m+1.
  std::vector<double> prev(m + 2, 0.0), curr(m + 2, 0.0);
  prev[1] = 0.0;
  for (std::size_t j = 2; j <= m + 1; ++j) prev[j] = prev[j - 1] + sq(B(j - 2) - B(j - 1));
  double first_column = 0.0;
  for (std::size_t i = 2; i <= m + 1; ++i) {
    first_column += sq(A(i - 2) - A(i - 1));
    curr[1] = first_column;
    for (std::size_t j = 2; j <= m + 1; ++j) {
      const double offset = static_cast<double>(i > j ? i - j : j - i);
      double match;
      if (i > 2 && j > 2)
        match = prev[j - 1] + nu * offset * 2.0 + sq(A(i - 1) - B(j - 1)) + sq(A(i - 2) - B(j - 2));
      else
        match = prev[j - 1] + nu * offset + sq(A(i - 1) - B(j - 1));
      const double del = i > 2 ? prev[j] + sq(A(i - 1) - A(i - 2)) + lambda + nu
                               : prev[j] + sq(A(i - 1)) + lambda;
      const double ins = j > 2 ? curr[j - 1] + sq(B(j - 1) - B(j - 2)) + lambda + nu
                               : curr[j - 1] + sq(B(j - 1)) + lambda;
      curr[j] = std::min({match, del, ins});
    }
    std::swap(prev, curr);
  }
  return prev[m + 1];
}

namespace {
inline double msm_cost(double x, double prev, double other, double c) {
  if ((prev <= x && x <= other) || (prev >= x && x >= other)) return c;
  return c + std::min(std::fabs(x - prev), std::fabs(x - other));
}
}  // namespace

double msm(std::span<const double> a, std::span<const double> b, double c) {
  require_equal(a, b);
  const std::size_t m = a.size();
  std::vector<double> prev(m), curr(m);
  prev[0] = std::fabs(a[0] - b[0]);
  for (std::size_t j = 1; j < m; ++j) prev[j] = prev[j - 1] + msm_cost(b[j], a[0], b[j - 1], c);
  for (std::size_t i = 1; i < m; ++i) {
    curr[0] = prev[0] + msm_cost(a[i], a[i - 1], b[0], c);
    for (std::size_t j = 1; j < m; ++j) {
      const double move = prev[j - 1] + std::fabs(a[i] - b[j]);
      const double split = prev[j] + msm_cost(a[i], a[i - 1], b[j], c);
      const double merge = curr[j - 1] + msm_cost(b[j], a[i], b[j - 1], c);
      curr[j] = std::min({move, split, merge});
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

double complexity_estimate(std::span<const double> series) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) sum += sq(series[i] - series[i + 1]);
  return sum;
}

double complexity_correction(double ca, double cb) {
  const double hi = std::max(ca, cb);
  const double lo = std::min(ca, cb);
  if (lo > 0.0) return hi / lo;
  return hi > 0.0 ? hi / 1e-8 : 1.0;
}

double cid(std::span<const double> a, std::span<const double> b, const BaseDistance& base) {
  require_equal(a, b);
  if (a.size() < 2) throw LengthError("cid needs series of length >= 2");
  const double d = base(a, b);
  return d * complexity_correction(complexity_estimate(a), complexity_estimate(b));
}

double dd_dtw(std::span<const double> a, std::span<const double> b, double alpha,
              const BaseDistance& base) {
  require_equal(a, b);
  const Series da = diff_transform(a);
  const Series db = diff_transform(b);
  const double x = base(a, b);
  const double y = base(da, db);
  return alpha * x + (1.0 - alpha) * y;
}

double dtd_c(std::span<const double> a, std::span<const double> b, double alpha, double beta,
             const BaseDistance& base) {
  if (alpha < 0.0 || beta < 0.0 || alpha + beta > 1.0 + 1e-12)
    throw ParameterError("dtd_c weights need alpha, beta >= 0 and alpha + beta <= 1");
  require_equal(a, b);
  const double x = base(a, b);
  const double y = base(diff_transform(a), diff_transform(b));
  const double z = base(cosine_transform(a), cosine_transform(b));
  return alpha * x + beta * y + (1.0 - alpha - beta) * z;
}

// ---------------------------------------------------------------------------

DistanceSpec DistanceSpec::ed() { return {}; }
DistanceSpec DistanceSpec::dtw(double r) {
  DistanceSpec s;
  s.kind = DistanceKind::DTW;
  s.window = r;
  return s;
}
DistanceSpec DistanceSpec::ddtw(double r) {
  DistanceSpec s = dtw(r);
  s.kind = DistanceKind::DDTW;
  return s;
}
DistanceSpec DistanceSpec::wdtw(double g) {
  DistanceSpec s;
  s.kind = DistanceKind::WDTW;
  s.g = g;
  return s;
}
DistanceSpec DistanceSpec::wddtw(double g) {
  DistanceSpec s = wdtw(g);
  s.kind = DistanceKind::WDDTW;
  return s;
}
DistanceSpec DistanceSpec::lcss(double epsilon, double r) {
  DistanceSpec s;
  s.kind = DistanceKind::LCSS;
  s.epsilon = epsilon;
  s.window = r;
  return s;
}
DistanceSpec DistanceSpec::erp(double gap, double r) {
  DistanceSpec s;
  s.kind = DistanceKind::ERP;
  s.g = gap;
  s.window = r;
  return s;
}
DistanceSpec DistanceSpec::twe(double nu, double lambda) {
  DistanceSpec s;
  s.kind = DistanceKind::TWE;
  s.nu = nu;
  s.lambda = lambda;
  return s;
}
DistanceSpec DistanceSpec::msm(double c) {
  DistanceSpec s;
  s.kind = DistanceKind::MSM;
  s.cost = c;
  return s;
}
DistanceSpec DistanceSpec::cid(double r) {
  DistanceSpec s = dtw(r);
  s.kind = DistanceKind::CID;
  return s;
}
DistanceSpec DistanceSpec::dd_dtw(double alpha) {
  DistanceSpec s;
  s.kind = DistanceKind::DDdtw;
  s.alpha = alpha;
  return s;
}
DistanceSpec DistanceSpec::dtd_c(double alpha, double beta) {
  DistanceSpec s;
  s.kind = DistanceKind::DTDc;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

namespace {

std::string shortest(double v) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, ptr);
}

std::string window_text(double r) {
  const double scaled = r * 100.0;
  if (std::fabs(scaled - std::round(scaled)) < 1e-9) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", r);
    return buffer;
  }
  return shortest(r);
}

const char* kind_name(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::ED: return "ed";
    case DistanceKind::DTW: return "dtw";
    case DistanceKind::DDTW: return "ddtw";
    case DistanceKind::WDTW: return "wdtw";
    case DistanceKind::WDDTW: return "wddtw";
    case DistanceKind::LCSS: return "lcss";
    case DistanceKind::ERP: return "erp";
    case DistanceKind::TWE: return "twe";
    case DistanceKind::MSM: return "msm";
    case DistanceKind::CID: return "cid";
    case DistanceKind::DDdtw: return "dddtw";
    case DistanceKind::DTDc: return "dtdc";
  }
  return "?";
}

}  // namespace

std::string DistanceSpec::to_string() const {
  std::string out = kind_name(kind);
  switch (kind) {
    case DistanceKind::ED: return out;
    case DistanceKind::DTW:
    case DistanceKind::DDTW:
    case DistanceKind::CID: return out + "(r=" + window_text(window) + ")";
    case DistanceKind::WDTW:
    case DistanceKind::WDDTW: return out + "(g=" + shortest(g) + ")";
    case DistanceKind::LCSS:
      return out + "(eps=" + shortest(epsilon) + ",r=" + window_text(window) + ")";
    case DistanceKind::ERP: return out + "(g=" + shortest(g) + ",r=" + window_text(window) + ")";
    case DistanceKind::TWE: return out + "(nu=" + shortest(nu) + ",lambda=" + shortest(lambda) + ")";
    case DistanceKind::MSM: return out + "(c=" + shortest(cost) + ")";
    case DistanceKind::DDdtw: return out + "(a=" + shortest(alpha) + ")";
    case DistanceKind::DTDc: return out + "(a=" + shortest(alpha) + ",b=" + shortest(beta) + ")";
  }
  return out;
}

DistanceSpec DistanceSpec::parse(std::string_view text) {
  const auto open = text.find('(');
  const std::string name(text.substr(0, open));
  std::map<std::string, double> params;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ParseError("malformed distance spec: " + std::string(text));
    std::string_view body = text.substr(open + 1, text.size() - open - 2);
    while (!body.empty()) {
      const auto comma = body.find(',');
      std::string_view item = body.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("malformed distance parameter: " + std::string(item));
      double value = 0.0;
      std::string_view number = item.substr(eq + 1);
      auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
      if (ec != std::errc() || ptr != number.data() + number.size())
        throw ParseError("malformed distance parameter: " + std::string(item));
      params[std::string(item.substr(0, eq))] = value;
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
  }
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end())
      throw ParseError("distance spec '" + std::string(text) + "' lacks parameter " + key);
    return it->second;
  };
  if (name == "ed") return ed();
  if (name == "dtw") return dtw(get("r"));
  if (name == "ddtw") return ddtw(get("r"));
  if (name == "cid") return cid(get("r"));
  if (name == "wdtw") return wdtw(get("g"));
  if (name == "wddtw") return wddtw(get("g"));
  if (name == "lcss") return lcss(get("eps"), get("r"));
  if (name == "erp") return erp(get("g"), get("r"));
  if (name == "twe") return twe(get("nu"), get("lambda"));
  if (name == "msm") return msm(get("c"));
  if (name == "dddtw") return dd_dtw(get("a"));
  if (name == "dtdc") return dtd_c(get("a"), get("b"));
  throw ParseError("unknown distance kind: " + name);
}

PreparedSeries prepare(std::span<const double> series, const DistanceSpec& spec) {
  PreparedSeries p;
  p.raw.assign(series.begin(), series.end());
  switch (spec.kind) {
    case DistanceKind::DDTW:
    case DistanceKind::WDDTW: p.diff = diff_transform(series); break;
    case DistanceKind::DDdtw: p.diff = diff_transform(series); break;
    case DistanceKind::DTDc:
      p.diff = diff_transform(series);
      p.cosine = cosine_transform(series);
      break;
    case DistanceKind::CID: p.complexity = complexity_estimate(series); break;
    default: break;
  }
  return p;
}

std::vector<DistanceComponent> linear_components(const DistanceSpec& spec) {
  switch (spec.kind) {
    case DistanceKind::DDTW: return {{1.0, DistanceSpec::dtw(spec.window), SeriesView::Diff}};
    case DistanceKind::WDDTW: return {{1.0, DistanceSpec::wdtw(spec.g), SeriesView::Diff}};
    case DistanceKind::CID: return {{1.0, DistanceSpec::dtw(spec.window), SeriesView::Raw}};
    case DistanceKind::DDdtw:
      return {{spec.alpha, DistanceSpec::dtw(1.0), SeriesView::Raw},
              {1.0 - spec.alpha, DistanceSpec::dtw(1.0), SeriesView::Diff}};
    case DistanceKind::DTDc:
      return {{spec.alpha, DistanceSpec::dtw(1.0), SeriesView::Raw},
              {spec.beta, DistanceSpec::dtw(1.0), SeriesView::Diff},
              {1.0 - spec.alpha - spec.beta, DistanceSpec::dtw(1.0), SeriesView::Cosine}};
    default: return {{1.0, spec, SeriesView::Raw}};
  }
}

namespace {

const Series& view_of(const PreparedSeries& p, SeriesView view) {
  switch (view) {
    case SeriesView::Diff: return p.diff;
    case SeriesView::Cosine: return p.cosine;
    default: return p.raw;
  }
}

// Single-view measures only.
double base_distance(const DistanceSpec& spec, std::span<const double> a,
                     std::span<const double> b, double cutoff) {
  switch (spec.kind) {
    case DistanceKind::ED: return euclidean(a, b, cutoff);
    case DistanceKind::DTW: return dtw(a, b, spec.window, cutoff);
    case DistanceKind::WDTW: return wdtw(a, b, spec.g, cutoff);
    case DistanceKind::LCSS: return lcss(a, b, spec.epsilon, spec.window);
    case DistanceKind::ERP: return erp(a, b, spec.g, spec.window);
    case DistanceKind::TWE: return twe(a, b, spec.nu, spec.lambda);
    case DistanceKind::MSM: return msm(a, b, spec.cost);
    default: throw ParameterError("not a single-view measure: " + spec.to_string());
  }
}

}  // namespace

double distance(const DistanceSpec& spec, const PreparedSeries& a, const PreparedSeries& b,
                double cutoff) {
  if (spec.kind == DistanceKind::DTDc &&
      (spec.alpha < 0.0 || spec.beta < 0.0 || spec.alpha + spec.beta > 1.0 + 1e-12))
    throw ParameterError("dtd_c weights need alpha, beta >= 0 and alpha + beta <= 1");
  const auto components = linear_components(spec);
  if (components.size() == 1) {
    const auto& c = components.front();
    if (spec.kind == DistanceKind::CID) {
      const double factor = complexity_correction(a.complexity, b.complexity);
      const double d = base_distance(c.base, a.raw, b.raw, cutoff / factor * (1.0 + 1e-12));
      return std::isinf(d) ? kInfinity : d * factor;
    }
    return base_distance(c.base, view_of(a, c.view), view_of(b, c.view), cutoff);
  }
  double sum = 0.0;
  for (const auto& c : components)
    sum += c.weight * base_distance(c.base, view_of(a, c.view), view_of(b, c.view), kInfinity);
  return sum;
}

double distance(const DistanceSpec& spec, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LengthError("series lengths differ");
  return distance(spec, prepare(a, spec), prepare(b, spec));
}

}  // namespace tsc
