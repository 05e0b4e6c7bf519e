#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "tsc/error.hpp"
#include "tsc/shapelets.hpp"
#include "tsc/transforms.hpp"

using namespace tsc;

namespace {

std::vector<double> znorm_two_pass(std::span<const double> x) {
  double mu = 0;
  for (double v : x) mu += v;
  mu /= x.size();
  double var = 0;
  for (double v : x) var += (v - mu) * (v - mu);
  const double sd = std::sqrt(var / x.size());
  std::vector<double> out(x.size(), 0.0);
  if (sd > 1e-12 * std::max(1.0, std::fabs(mu)))
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mu) / sd;
  return out;
}

double naive_sdist(const std::vector<double>& sub, const std::vector<double>& series) {
  const auto s = znorm_two_pass(sub);
  double best = 1e300;
  for (std::size_t j = 0; j + sub.size() <= series.size(); ++j) {
    const auto w = znorm_two_pass(std::span(series).subspan(j, sub.size()));
    double d = 0;
    for (std::size_t k = 0; k < sub.size(); ++k) d += (s[k] - w[k]) * (s[k] - w[k]);
    best = std::min(best, d / sub.size());
  }
  return best;
}

// Information gain over every threshold by brute force, binary labels.
double naive_gain(const std::vector<double>& d, const std::vector<int>& y) {
  auto h = [](double a, double b) {
    double n = a + b, r = 0;
    for (double v : {a, b})
      if (v > 0) r -= v / n * std::log2(v / n);
    return r;
  };
  double pos = 0;
  for (int v : y) pos += v;
  const double base = h(pos, y.size() - pos);
  double best = 0;
  for (double t : d) {
    double lp = 0, ln = 0, rp = 0, rn = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
      (d[i] <= t ? (y[i] ? lp : ln) : (y[i] ? rp : rn)) += 1;
    const double nl = lp + ln, nr = rp + rn, n = nl + nr;
    if (nl == 0 || nr == 0) continue;
    best = std::max(best, base - nl / n * h(lp, ln) - nr / n * h(rp, rn));
  }
  return best;
}

}  // namespace

TEST_CASE("sdist") {
  Rng rng(1);
  const auto s = oracle::random_series(rng, 30);
  const std::vector<double> sub(s.begin() + 7, s.begin() + 15);
  CHECK(sdist(sub, s) == doctest::Approx(0.0).epsilon(1e-12));
  std::vector<double> affine;
  for (double v : sub) affine.push_back(2 * v + 3);
  CHECK(sdist(affine, s) <= 1e-9);
  CHECK_THROWS_AS(sdist(s, sub), LengthError);

  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 5 + rng.index(30), l = 3 + rng.index(m - 2);
    const auto a = oracle::random_series(rng, l, 1 + 5 * rng.uniform());
    auto b = oracle::random_series(rng, m, 1 + 5 * rng.uniform());
    if (t % 10 == 0)
      for (std::size_t k = 0; k < std::min<std::size_t>(m, 4); ++k) b[k] = 7.0;  // flat windows
    const double got = sdist(a, b);
    CHECK(got >= 0.0);
    CHECK(got == doctest::Approx(naive_sdist(a, b)).epsilon(1e-12).scale(1.0));
  }
  // Flat shapelet against flat window is an exact match.
  const std::vector<double> flat(4, 1.0), host{5, 2, 2, 2, 2, 9};
  CHECK(sdist(flat, host) == 0.0);
}

TEST_CASE("candidate quality") {
  const std::vector<double> d{0.1, 0.2, 0.9, 1.0};
  const std::vector<int> y{1, 1, 0, 0};
  CHECK(assess_candidate(d, y, 1) == doctest::Approx(1.0));
  CHECK(assess_candidate(d, y, 0) == doctest::Approx(1.0));
  const auto split = best_split(d, y, 2);
  CHECK(split.threshold > 0.2);
  CHECK(split.threshold < 0.9);
  CHECK(assess_candidate(std::vector<double>(4, 0.5), y, 1) == 0.0);
  CHECK(assess_candidate(d, std::vector<int>{1, 1, 1, 1}, 1) == 0.0);
  CHECK(assess_candidate(d, std::vector<int>{0, 0, 0, 0}, 1) == 0.0);

  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng.index(15);
    std::vector<double> dist(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::round(rng.uniform() * 6) / 6;  // ties on purpose
      labels[i] = static_cast<int>(rng.index(3));
    }
    std::vector<int> bin;
    for (int v : labels) bin.push_back(v == 1);
    const double q = assess_candidate(dist, labels, 1);
    CHECK(q == doctest::Approx(naive_gain(dist, bin)).epsilon(1e-12));
    // Monotone maps leave the threshold set, hence the quality, unchanged.
    std::vector<double> mapped;
    for (double v : dist) mapped.push_back(std::exp(3 * v) - 1);
    CHECK(assess_candidate(mapped, labels, 1) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("self similarity and merge") {
  const std::vector<double> s{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto a = make_shapelet(s, 0, 2, 4), b = make_shapelet(s, 0, 4, 4), c = make_shapelet(s, 0, 6, 3),
       other = make_shapelet(s, 1, 2, 4);
  a.quality = 0.9, b.quality = 0.5, c.quality = 0.4, other.quality = 0.3;
  CHECK(a.overlaps(b));
  CHECK(!a.overlaps(c));
  CHECK(!a.overlaps(other));
  const auto kept = remove_self_similar({a, b, c, other});
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].start == 2);
  CHECK(kept[1].start == 6);
  CHECK(kept[2].source == 1);

  std::vector<Shapelet> selected;
  merge_shapelets(selected, 2, {a, c});
  auto d = make_shapelet(s, 2, 0, 3);
  d.quality = 0.4;
  merge_shapelets(selected, 2, {d});
  REQUIRE(selected.size() == 2);
  CHECK(selected[1].source == 0);  // existing entry wins the tie
  auto e = make_shapelet(s, 3, 0, 3, 1);
  merge_shapelets(selected, 2, {e});
  CHECK(selected.size() == 3);
}

TEST_CASE("binary shapelet selection") {
  Rng rng(3);
  const auto planted = synth::square_pulse(8, 40, 8, rng);
  const auto& train = planted.data;

  StOptions o;
  o.k = 2;
  auto one_each = binary_shapelet_selection(train, o);
  CHECK(one_each.size() <= 2);
  for (int cls : {0, 1})
    CHECK(std::count_if(one_each.begin(), one_each.end(),
                        [&](const Shapelet& s) { return s.class_label == cls; }) <= 1);

  o.k = 0;
  const auto all = binary_shapelet_selection(train, o);
  CHECK(all.size() <= std::min<std::size_t>(10 * train.size(), 1000));
  CHECK(std::is_sorted(all.begin(), all.end(),
                       [](const Shapelet& a, const Shapelet& b) { return a.quality > b.quality; }));
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) CHECK(!all[i].overlaps(all[j]));
  REQUIRE(!all.empty());
  const auto& top = all.front();
  CHECK(top.class_label == 1);
  const std::size_t ps = planted.pulse_start[top.source];
  CHECK(top.start < ps + planted.pulse_length);
  CHECK(ps < top.start + top.length());
  CHECK(top.length() >= 3);
  CHECK(top.length() <= 39);
  for (const auto& s : all) CHECK(s.quality >= 0.0);

  o.max_length = 100;  // clamped
  o.max_candidates = 200;
  const auto sampled = binary_shapelet_selection(train, o);
  CHECK(!sampled.empty());
  const auto again = binary_shapelet_selection(train, o);
  REQUIRE(again.size() == sampled.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].values == sampled[i].values);
  o.min_length = 2;
  CHECK_THROWS_AS(binary_shapelet_selection(train, o), ParameterError);
}

TEST_CASE("shapelet transform") {
  Rng rng(4);
  const auto planted = synth::square_pulse(4, 30, 6, rng);
  const auto& d = planted.data;
  std::vector<Shapelet> shapelets{make_shapelet(d.series(3), 3, 5, 6), make_shapelet(d.series(0), 0, 0, 4)};
  const auto t = shapelet_transform(shapelets, d);
  CHECK(t.x.rows() == d.size());
  CHECK(t.x.cols() == 2);
  CHECK(t.x.at(3, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(t.x.at(0, 1) == doctest::Approx(0.0).scale(1.0));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(t.x.at(i, j) == sdist(shapelets[j], d.series(i)));
  // Each row depends only on its own series.
  const auto other = synth::square_pulse(3, 30, 6, rng).data;
  const auto u = shapelet_transform(shapelets, other);
  for (std::size_t i = 0; i < other.size(); ++i)
    CHECK(shapelet_features(shapelets, other.series(i)) ==
          std::vector<double>(u.x.row(i).begin(), u.x.row(i).end()));
  CHECK_THROWS_AS(shapelet_transform({}, d), ParameterError);
  const auto csv = shapelets_csv(shapelets);
  CHECK(csv.starts_with("class,quality,source,start,length"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("cv weighted vote") {
  // Three constant voters with fixed weights.
  struct Fixed : TabularClassifier {
    int label;
    explicit Fixed(int l) : label(l) {}
    std::string name() const override { return "fixed"; }
    void fit(const TabularDataset&) override {}
    std::vector<double> distribution(std::span<const double>) const override { return one_hot(label, 2); }
  };
  std::vector<std::unique_ptr<TabularClassifier>> members;
  members.push_back(std::make_unique<Fixed>(1));
  members.push_back(std::make_unique<Fixed>(0));
  members.push_back(std::make_unique<Fixed>(0));
  WeightedEnsemble e(std::move(members), {0.9, 0.1, 0.1});
  const std::vector<double> row{0.0};
  CHECK(e.predict(row) == 1);

  TabularDataset table;
  table.class_count = 2;
  for (int i = 0; i < 20; ++i) {
    const double v = i;
    table.x.push_row(std::vector<double>{v});
    table.y.push_back(i < 10 ? 0 : 1);
  }
  CvWeightedEnsemble agree({[] { return std::make_unique<Fixed>(1); }, [] { return std::make_unique<Fixed>(1); }});
  agree.fit(table);
  CHECK(agree.weights()[0] == doctest::Approx(0.5));
  CHECK(agree.predict(row) == 1);
}

TEST_CASE("shapelet transform ensemble") {
  Rng rng(5);
  const auto train = synth::square_pulse(10, 50, 10, rng).data;
  const auto test = synth::square_pulse(50, 50, 10, rng).data;
  ShapeletTransformClassifier st;
  st.fit(train);
  CHECK(st.ensemble().member_count() == 3);
  CHECK(accuracy(st, test) >= 0.95);
  const auto d = st.distribution(test.series(0));
  CHECK(d[0] + d[1] == doctest::Approx(1.0));
}

TEST_CASE("fast shapelets") {
  Rng rng(6);
  const auto train = synth::square_pulse(10, 50, 10, rng).data;
  const auto test = synth::square_pulse(50, 50, 10, rng).data;
  FastShapelets fs({.seed = 3});
  fs.fit(train);
  CHECK(accuracy(fs, train) == 1.0);
  CHECK(accuracy(fs, test) >= 0.9);
  FastShapelets again({.seed = 3});
  again.fit(train);
  CHECK(predict_all(again, test) == predict_all(fs, test));

  // A pure node is a leaf.
  std::vector<Series> one{{1, 2, 3, 4, 5, 6}, {2, 3, 1, 5, 6, 0}};
  FastShapelets pure;
  pure.fit(Dataset(one, {1, 1}, 2));
  CHECK(pure.nodes().size() == 1);
  CHECK(pure.predict(one[0]) == 1);
}
