#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "tsc/error.hpp"
#include "tsc/learners.hpp"
#include "tsc/parallel.hpp"
#include "tsc/rng.hpp"
#include "tsc/trees.hpp"

using namespace tsc;

namespace {

TabularDataset gaussians(std::size_t per_class, double separation, std::uint64_t seed, int classes = 2) {
  Rng rng(seed);
  TabularDataset d;
  d.class_count = classes;
  for (std::size_t i = 0; i < per_class; ++i)
    for (int k = 0; k < classes; ++k) {
      std::vector<double> row{rng.normal() + separation * k, rng.normal() - separation * k};
      d.x.push_row(row);
      d.y.push_back(k);
    }
  return d;
}

double naive_entropy(const std::vector<double>& counts) {
  double n = 0, h = 0;
  for (double c : counts) n += c;
  for (double c : counts)
    if (c > 0) h -= c / n * std::log2(c / n);
  return h;
}

// Gain of splitting at value <= t, written directly from the definition.
double naive_gain(const TabularDataset& d, const std::vector<std::size_t>& rows, std::size_t f, double t) {
  std::vector<double> all(d.class_count), left(d.class_count), right(d.class_count);
  double nl = 0, nr = 0;
  for (auto r : rows) {
    all[d.y[r]]++;
    if (d.x.at(r, f) <= t) left[d.y[r]]++, nl++;
    else right[d.y[r]]++, nr++;
  }
  const double n = nl + nr;
  return naive_entropy(all) - nl / n * naive_entropy(left) - nr / n * naive_entropy(right);
}

double tab_accuracy(const TabularClassifier& c, const TabularDataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += c.predict(d.x.row(i)) == d.y[i];
  return static_cast<double>(ok) / d.size();
}

void check_distributions(const TabularClassifier& c, const TabularDataset& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto p = c.distribution(d.x.row(i));
    CHECK(std::fabs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
  }
}

// Fixed-output member for ensemble tests.
class Constant : public TabularClassifier {
 public:
  Constant(int label, int c) : label_(label), c_(c) {}
  std::string name() const override { return "const"; }
  void fit(const TabularDataset&) override {}
  std::vector<double> distribution(std::span<const double>) const override {
    std::vector<double> d(c_, 0.0);
    d[label_] = 1.0;
    return d;
  }

 private:
  int label_, c_;
};

}  // namespace

TEST_CASE("random tree shape") {
  TabularDataset pure;
  pure.class_count = 2;
  for (int i = 0; i < 5; ++i) pure.x.push_row(std::vector<double>{double(i), 1.0}), pure.y.push_back(1);
  RandomTree t;
  t.fit(pure, {}, 1);
  CHECK(t.nodes().size() == 1);
  CHECK(t.leaf_count() == 1);

  TabularDataset line;
  line.class_count = 2;
  for (int i = 0; i < 10; ++i) line.x.push_row(std::vector<double>{double(i)}), line.y.push_back(i >= 5);
  RandomTree s;
  s.fit(line, {}, 2);
  CHECK(s.depth() == 1);
  for (std::size_t i = 0; i < line.size(); ++i) CHECK(s.predict(line.x.row(i)) == line.y[i]);
  CHECK(s.nodes()[0].threshold == doctest::Approx(4.5));

  std::vector<std::size_t> none;
  Rng rng(1);
  CHECK_THROWS_AS(s.fit(line, none, {}, rng), InputError);
}

TEST_CASE("random tree determinism and split optimality") {
  auto d = gaussians(30, 0.8, 5, 3);
  for (int extra = 0; extra < 4; ++extra) {
    Rng rng(extra);
    std::vector<double> noise;
    for (std::size_t i = 0; i < d.size(); ++i) noise.push_back(rng.normal());
    FeatureMatrix wider;
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<double> row(d.x.row(i).begin(), d.x.row(i).end());
      row.push_back(noise[i]);
      wider.push_row(row);
    }
    d.x = wider;
  }
  TreeOptions opt;
  opt.record_candidates = true;
  RandomTree a, b;
  a.fit(d, opt, 42);
  b.fit(d, opt, 42);
  REQUIRE(a.nodes().size() == b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].feature == b.nodes()[i].feature);
    CHECK(a.nodes()[i].threshold == b.nodes()[i].threshold);
  }

  // Re-derive every emitted split: recompute the rows reaching it and check
  // its gain against all thresholds on every sampled attribute.
  std::vector<std::vector<std::size_t>> reach(a.nodes().size());
  reach[0].resize(d.size());
  std::iota(reach[0].begin(), reach[0].end(), std::size_t{0});
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    const auto& node = a.nodes()[i];
    if (node.feature < 0) continue;
    CHECK(node.candidates.size() >= 1);
    const double emitted = naive_gain(d, reach[i], node.feature, node.threshold);
    CHECK(std::fabs(emitted - node.gain) < 1e-9);
    for (int f : node.candidates) {
      std::vector<double> values;
      for (auto r : reach[i]) values.push_back(d.x.at(r, f));
      std::sort(values.begin(), values.end());
      for (std::size_t v = 0; v + 1 < values.size(); ++v) {
        if (values[v] == values[v + 1]) continue;
        CHECK(naive_gain(d, reach[i], f, (values[v] + values[v + 1]) / 2) <= emitted + 1e-9);
      }
    }
    for (auto r : reach[i])
      reach[d.x.at(r, node.feature) <= node.threshold ? node.left : node.right].push_back(r);
  }
}

TEST_CASE("random forest") {
  auto train = gaussians(60, 4.0, 7);
  RandomForest forest({100, {}, 3});
  forest.fit(train);
  CHECK(forest.oob_error() < 0.10);
  check_distributions(forest, train);
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto p = forest.oob_distribution(i);
    CHECK(std::fabs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
  }

  RandomForest single({1, {}, 9});
  single.fit(train);
  for (std::size_t i = 0; i < train.size(); ++i)
    CHECK(single.predict(train.x.row(i)) == single.tree(0).predict(train.x.row(i)));

  RandomForest grown({0, {}, 11});
  grown.fit_incremental(gaussians(40, 1.0, 8), {50, 1000});
  CHECK(grown.tree_count() <= 1000);
  CHECK(grown.tree_count() % 50 == 0);
  const auto& h = grown.oob_error_history();
  for (std::size_t i = 1; i + 1 < h.size(); ++i) CHECK(h[i] < h[i - 1]);
  CHECK(grown.tree_count() == 50 * h.size());

  RandomForest capped({0, {}, 11});
  capped.fit_incremental(gaussians(40, 1.0, 8), {50, 120});
  CHECK(capped.tree_count() <= 120);
}

TEST_CASE("forest is invariant to thread count") {
  auto train = gaussians(40, 1.0, 12);
  auto test = gaussians(20, 1.0, 13);
  set_thread_count(1);
  RandomForest a({60, {}, 5});
  a.fit(train);
  set_thread_count(4);
  RandomForest b({60, {}, 5});
  b.fit(train);
  set_thread_count(1);
  for (std::size_t i = 0; i < test.size(); ++i)
    CHECK(a.distribution(test.x.row(i)) == b.distribution(test.x.row(i)));
  CHECK(a.oob_error() == b.oob_error());
}

TEST_CASE("regression tree") {
  Rng rng(3);
  FeatureMatrix x;
  std::vector<double> y;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> row{rng.normal(), rng.normal(), rng.normal()};
    y.push_back(row[0] * 2 + rng.normal() * 0.1);
    x.push_row(row);
  }
  RegressionTree one;
  Rng r1(1);
  one.fit(x, y, 1, r1);
  CHECK(one.leaf_count() <= 2);

  std::vector<double> flat(100, 3.0);
  RegressionTree constant;
  Rng r2(2);
  constant.fit(x, flat, 6, r2);
  CHECK(constant.leaf_count() == 1);

  RegressionTree deep;
  Rng r3(3);
  deep.fit(x, y, 6, r3);
  CHECK(deep.leaf_count() <= 64);
  std::vector<std::size_t> counts(deep.leaf_count(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto leaf = deep.leaf_index(x.row(i));
    REQUIRE(leaf < deep.leaf_count());
    counts[leaf]++;
  }
  CHECK(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == x.rows());
  for (auto c : counts) CHECK(c >= 1);
}

TEST_CASE("naive Bayes") {
  auto train = gaussians(50, 3.0, 21);
  NaiveBayes nb;
  nb.fit(train);
  CHECK(tab_accuracy(nb, train) > 0.95);
  check_distributions(nb, train);

  TabularDataset same;
  same.class_count = 2;
  Rng rng(4);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 5; ++i) rows.push_back({rng.normal(), rng.normal()});
  for (int copy = 0; copy < 3; ++copy)
    for (const auto& r : rows) same.x.push_row(r), same.y.push_back(copy < 2 ? 1 : 0);
  NaiveBayes prior;
  prior.fit(same);
  for (std::size_t i = 0; i < same.size(); ++i) CHECK(prior.predict(same.x.row(i)) == 1);

  TabularDataset zero;
  zero.class_count = 2;
  for (int i = 0; i < 6; ++i) zero.x.push_row(std::vector<double>{0.0, double(i % 2)}), zero.y.push_back(i % 2);
  NaiveBayes floored;
  floored.fit(zero);
  CHECK(floored.predict(std::vector<double>{0.0, 1.0}) == 1);
  check_distributions(floored, zero);
}

TEST_CASE("polynomial SVM") {
  auto sep = gaussians(30, 6.0, 31);
  PolynomialSvm linear({1});
  linear.fit(sep);
  CHECK(tab_accuracy(linear, sep) == 1.0);

  TabularDataset xor_data;
  xor_data.class_count = 2;
  for (auto [a, b, l] : {std::tuple{0.0, 0.0, 0}, {1.0, 1.0, 0}, {0.0, 1.0, 1}, {1.0, 0.0, 1}})
    xor_data.x.push_row(std::vector<double>{a, b}), xor_data.y.push_back(l);
  PolynomialSvm quad({2, 100.0});
  quad.fit(xor_data);
  CHECK(tab_accuracy(quad, xor_data) == 1.0);

  PolynomialSvm poly({2});
  auto train = gaussians(25, 1.5, 33);
  poly.fit(train);
  const auto& svm = poly.pair_model(0);
  CHECK(svm.converged());
  const auto& obj = svm.objective_history();
  for (std::size_t i = 1; i < obj.size(); ++i) CHECK(obj[i] >= obj[i - 1] - 1e-9);
  // Margin consistency: free support vectors sit on the margin, bound ones inside it.
  auto z = poly.standardizer().apply(train.x);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double a = svm.alpha()[i];
    const double y = train.y[i] == 0 ? 1.0 : -1.0;
    const double margin = y * svm.decision(z.row(i));
    if (a > 1e-8 && a < 1.0 - 1e-8) CHECK(std::fabs(margin - 1.0) < 1e-2);
    if (a <= 0.0) CHECK(margin >= 1.0 - 1e-2);
    if (a >= 1.0) CHECK(margin <= 1.0 + 1e-2);
  }

  auto three = gaussians(20, 5.0, 34, 3);
  PolynomialSvm ovo({1});
  ovo.fit(three);
  CHECK(ovo.pair_count() == 3);
  CHECK(tab_accuracy(ovo, three) > 0.95);
  check_distributions(ovo, three);
}

TEST_CASE("kNN") {
  auto train = gaussians(30, 4.0, 41);
  Knn knn;
  knn.fit(train);
  CHECK(knn.k() >= 1);
  CHECK(knn.k() <= 30);
  CHECK(tab_accuracy(knn, gaussians(20, 4.0, 42)) > 0.9);
  check_distributions(knn, train);
}

TEST_CASE("weighted ensemble") {
  auto d = gaussians(5, 1.0, 1);
  std::vector<std::unique_ptr<TabularClassifier>> one;
  one.push_back(std::make_unique<Constant>(1, 2));
  WeightedEnsemble single(std::move(one), {2.0});
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(single.predict(d.x.row(i)) == 1);

  std::vector<std::unique_ptr<TabularClassifier>> two;
  two.push_back(std::make_unique<Constant>(0, 2));
  two.push_back(std::make_unique<Constant>(1, 2));
  WeightedEnsemble first(std::move(two), {1.0, 0.0});
  CHECK(first.predict(d.x.row(0)) == 0);

  std::vector<std::unique_ptr<TabularClassifier>> three;
  three.push_back(std::make_unique<Constant>(0, 3));
  three.push_back(std::make_unique<Constant>(0, 3));
  three.push_back(std::make_unique<Constant>(2, 3));
  WeightedEnsemble majority(std::move(three), {1.0, 1.0, 1.0});
  CHECK(majority.predict(d.x.row(0)) == 0);
  auto p = majority.distribution(d.x.row(0));
  CHECK(p[0] == doctest::Approx(2.0 / 3));

  std::vector<std::unique_ptr<TabularClassifier>> zeros;
  zeros.push_back(std::make_unique<Constant>(0, 2));
  CHECK_THROWS_AS(WeightedEnsemble(std::move(zeros), {0.0}), ParameterError);
}

TEST_CASE("cross validation helpers") {
  std::vector<int> labels{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  auto folds = stratified_folds(labels, 5, 3);
  for (int f = 0; f < 5; ++f) CHECK(std::count(folds.begin(), folds.end(), f) == 2);
  auto d = gaussians(20, 5.0, 9);
  const double acc = cross_validate([] { return std::make_unique<NaiveBayes>(); }, d, 10, 1);
  CHECK(acc > 0.9);
}
