#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "stats_oracle.hpp"
#include "tsc/error.hpp"
#include "tsc/experiment.hpp"
#include "tsc/log.hpp"
#include "tsc/nn.hpp"
#include "tsc/registry.hpp"
#include "tsc/rng.hpp"
#include "tsc/stats.hpp"
#include "tsc/ucr.hpp"

using namespace tsc;

namespace {

std::vector<std::vector<double>> random_table(Rng& rng, std::size_t k, std::size_t n, double grain) {
  std::vector<std::vector<double>> t(k, std::vector<double>(n));
  for (auto& row : t)
    for (double& v : row) v = std::round((0.5 + 0.5 * rng.uniform()) / grain) * grain;
  return t;
}

struct Quiet {
  Quiet() { set_warnings_enabled(false); }
  ~Quiet() { set_warnings_enabled(true); }
};

std::filesystem::path temp_file(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tsc_stats_" + name);
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("average ranks: best is 1 and ties share") {
  const std::vector<double> acc{0.9, 0.7, 0.9, 0.5};
  const auto r = average_ranks(acc);
  CHECK(r == std::vector<double>{1.5, 3.0, 1.5, 4.0});
  CHECK(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(10.0));
}

TEST_CASE("friedman hand examples") {
  // Two classifiers, first always ahead, N = 4.
  const auto two = friedman_test({{0.9, 0.8, 0.7, 0.6}, {0.8, 0.7, 0.6, 0.5}});
  CHECK(two.mean_ranks == std::vector<double>{1.0, 2.0});
  CHECK(two.chi_square == doctest::Approx(4.0).epsilon(1e-12));
  // N(k-1) - chi = 0 here.
  CHECK(std::isinf(two.iman_davenport));

  Quiet quiet;
  const auto tied = friedman_test({{0.8, 0.6, 0.7}, {0.8, 0.6, 0.7}});
  CHECK(tied.chi_square == 0.0);
  CHECK(tied.iman_davenport == 0.0);
  CHECK(tied.mean_ranks == std::vector<double>{1.5, 1.5});

  const std::vector<std::vector<double>> crafted{
      {0.90, 0.80, 0.70, 0.85}, {0.80, 0.80, 0.60, 0.90}, {0.70, 0.75, 0.65, 0.80}};
  const auto got = friedman_test(crafted);
  const auto want = oracle::friedman(crafted);
  CHECK(got.chi_square == doctest::Approx(want.chi).epsilon(1e-12));
  CHECK(got.iman_davenport == doctest::Approx(want.f).epsilon(1e-12));
  for (std::size_t j = 0; j < 3; ++j) CHECK(got.mean_ranks[j] == doctest::Approx(want.ranks[j]));

  CHECK_THROWS_AS(friedman_test({{0.5, 0.6}}), ParameterError);
  CHECK_THROWS_AS(friedman_test({{0.5}, {0.6}}), ParameterError);
  CHECK_THROWS_AS(friedman_test({{0.5, 0.6}, {0.6}}), SizeError);
}

TEST_CASE("friedman against the oracle, rank sums and monotone invariance") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t k = 2 + rng.index(8), n = 2 + rng.index(20);
    const auto t = random_table(rng, k, n, 0.05);
    bool constant = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) constant = constant && t[j][i] == t[0][i];
    if (constant) continue;
    const auto got = friedman_test(t);
    const auto want = oracle::friedman(t);
    CHECK(got.chi_square == doctest::Approx(want.chi).epsilon(1e-9));
    if (std::isfinite(want.f)) CHECK(got.iman_davenport == doctest::Approx(want.f).epsilon(1e-9));
    const double sum = std::accumulate(got.mean_ranks.begin(), got.mean_ranks.end(), 0.0);
    CHECK(sum == doctest::Approx(double(k) * (k + 1) / 2.0));

    auto warped = t;
    for (auto& row : warped)
      for (double& v : row) v = std::exp(3.0 * v) - 7.0;
    const auto again = friedman_test(warped);
    CHECK(again.chi_square == doctest::Approx(got.chi_square).epsilon(1e-12));
  }
}

TEST_CASE("nemenyi critical difference") {
  for (std::size_t n : {1, 4, 30, 85}) CHECK(nemenyi_cd(2, n, 0.05) == doctest::Approx(1.960 / std::sqrt(double(n))));
  CHECK(std::abs(nemenyi_cd(11, 85, 0.05) - 3.219 * std::sqrt(132.0 / 510.0)) < 1e-3);
  CHECK(nemenyi_cd(11, 85, 0.05) == doctest::Approx(1.64).epsilon(0.005));
  for (std::size_t k = 2; k <= 20; ++k) {
    CHECK(nemenyi_q(k, 0.10) < nemenyi_q(k, 0.05));
    if (k > 2) CHECK(nemenyi_q(k, 0.05) > nemenyi_q(k - 1, 0.05));
    for (std::size_t n = 2; n < 40; ++n) CHECK(nemenyi_cd(k, n, 0.05) < nemenyi_cd(k, n - 1, 0.05));
  }
  CHECK_THROWS_AS(nemenyi_cd(1, 10, 0.05), ParameterError);
  CHECK_THROWS_AS(nemenyi_cd(21, 10, 0.05), ParameterError);
  CHECK_THROWS_AS(nemenyi_cd(5, 10, 0.01), ParameterError);
}

TEST_CASE("sign test") {
  const std::vector<double> a(10, 0.9), b(10, 0.8);
  CHECK(sign_test(a, b) == doctest::Approx(2.0 * std::pow(0.5, 10)).epsilon(1e-12));
  CHECK(sign_test(a, b) == doctest::Approx(0.00195).epsilon(0.01));
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(1 + rng.index(60)), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::round(rng.uniform() * 4) / 4;
      y[i] = std::round(rng.uniform() * 4) / 4;
    }
    Quiet quiet;
    const double p = sign_test(x, y);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p == doctest::Approx(oracle::sign_test(differences(x, y))).epsilon(1e-9));
  }
}

TEST_CASE("wilcoxon signed rank") {
  Quiet quiet;
  // Symmetric differences.
  const std::vector<double> a{0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, b{0.4, 0.6, 0.3, 0.7, 0.2, 0.8};
  CHECK(wilcoxon_signrank(a, b) == doctest::Approx(1.0));
  // Crafted case: ranks 1..8, W+ = 1+2+3+8 = 14, checked by enumeration.
  const std::vector<double> d{0.01, -0.04, 0.02, -0.05, 0.03, -0.06, -0.07, 0.08};
  const std::vector<double> zero(d.size(), 0.0);
  CHECK(wilcoxon_signrank(d, zero) == doctest::Approx(oracle::wilcoxon_brute(d)).epsilon(1e-12));
  CHECK(wilcoxon_exact(d) == doctest::Approx(0.640625));  // 82 of 256 sums <= 14, two-sided

  CHECK(wilcoxon_signrank(a, a) == 1.0);
  CHECK_THROWS_AS(wilcoxon_signrank(std::vector<double>{1, 2, 3}, std::vector<double>{0, 0, 0}), InputError);
  CHECK_THROWS_AS(wilcoxon_signrank(std::vector<double>{1, 2}, std::vector<double>{0}), LengthError);

  Rng rng(99);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 5 + rng.index(16);
    std::vector<double> x(n);
    const bool ties = rep % 2 == 0;
    for (double& v : x) v = ties ? std::round((rng.uniform() - 0.4) * 8) / 8 : rng.uniform() - 0.4;
    if (std::count(x.begin(), x.end(), 0.0) > double(n) - 5) continue;
    const double exact = wilcoxon_exact(x);
    CHECK(exact == doctest::Approx(oracle::wilcoxon_brute(x)).epsilon(1e-9));
    CHECK(wilcoxon_normal(x) == doctest::Approx(oracle::wilcoxon_z(x)).epsilon(1e-9));
    CHECK(exact >= 0.0);
    CHECK(exact <= 1.0);
    if (n == 20 && !ties) worst = std::max(worst, std::abs(exact - wilcoxon_normal(x)));
  }
  // Exact and normal agree at N = 20.
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(20);
    for (double& v : x) v = rng.normal() + 0.3 * (rep % 3);
    worst = std::max(worst, std::abs(wilcoxon_exact(x) - wilcoxon_normal(x)));
  }
  CHECK(worst < 0.01);
  // Beyond 20 the dispatcher uses the normal form.
  std::vector<double> big(30);
  for (double& v : big) v = rng.normal();
  const std::vector<double> zeros(30, 0.0);
  CHECK(wilcoxon_signrank(big, zeros) == doctest::Approx(wilcoxon_normal(big)));
}

TEST_CASE("results table csv round trip and holes") {
  ResultsTable t;
  t.add({"twe", "Coffee", 0, 1.0, 0.96, "twe(nu=0.001,lambda=0.5)", 12.5, ""});
  t.add({"twe", "Coffee", 1, 0.5, std::nan(""), "", 3.0, ""});
  t.add({"ed", "Coffee", 0, 0, 0, "", 0, "fit failed: \"boom\", twice"});
  CHECK_THROWS_AS(t.add({"ed", "Coffee", 1, 1.5, 0.5, "", 0, ""}), RangeError);
  const auto path = temp_file("table.csv");
  t.write_csv(path);
  const auto back = ResultsTable::read_csv(path);
  CHECK(back.to_csv() == t.to_csv());
  CHECK(back.find("ed", "Coffee", 0)->failed());
  CHECK(back.find("ed", "Coffee", 0)->error == "fit failed: \"boom\", twice");
  CHECK(std::isnan(back.find("twe", "Coffee", 1)->train_accuracy));
  CHECK(back.find("twe", "Coffee", 0)->params == "twe(nu=0.001,lambda=0.5)");
  CHECK(*back.mean_accuracy("twe", "Coffee") == doctest::Approx(0.75));
  CHECK_FALSE(back.mean_accuracy("ed", "Coffee").has_value());
  CHECK(t.to_csv().rfind(ResultsTable::kHeader, 0) == 0);

  try {
    accuracy_grid(back, {"twe", "ed"}, {"Coffee", "GunPoint"});
    FAIL("expected holes");
  } catch (const InputError& e) {
    const std::string what = e.what();
    CHECK(what.find("ed x Coffee") != std::string::npos);
    CHECK(what.find("twe x GunPoint") != std::string::npos);
  }
  std::ofstream(path) << "bad,header\n";
  CHECK_THROWS_AS(ResultsTable::read_csv(path), ParseError);
}

TEST_CASE("pairwise summary") {
  ResultsTable t;
  Rng rng(5);
  for (const char* d : {"a", "b", "c", "d"})
    for (std::size_t f = 0; f < 10; ++f) {
      const double base = 0.5 + 0.4 * rng.uniform();
      t.add({"bench", d, f, base, 0.5, "", 0, ""});
      t.add({"plus", d, f, base + 0.05, 0.5, "", 0, ""});
    }
  const auto self = pairwise_summary(t, "bench", "bench");
  CHECK(self.prop_better == 0.0);
  CHECK(self.mean_difference == 0.0);
  CHECK(self.no_difference == 4);
  const auto plus = pairwise_summary(t, "plus", "bench");
  CHECK(plus.prop_better == 1.0);
  CHECK(plus.mean_difference == doctest::Approx(0.05));
  CHECK(plus.significantly_better == 4);
  const auto minus = pairwise_summary(t, "bench", "plus");
  CHECK(minus.significantly_worse == 4);
  CHECK(minus.mean_difference == doctest::Approx(-0.05));
  CHECK_THROWS_AS(pairwise_summary(t, "plus", "missing"), InputError);
}

TEST_CASE("cd diagram file") {
  const auto text = cd_diagram_csv({"b", "a", "c"}, {2.0, 2.0, 1.0}, 10, 0.05);
  char expected_cd[32];
  std::snprintf(expected_cd, sizeof expected_cd, "%.6f", 2.343 * std::sqrt(12.0 / 60.0));
  CHECK(text == std::string("alpha,k,N,cd\n0.05,3,10,") + expected_cd +
                    "\nclassifier,mean_rank\nc,1.000000\na,2.000000\nb,2.000000\n");
}

TEST_CASE("experiment runner: original split, shared folds, resume, failures") {
  const auto split = load_ucr_problem(TSC_TEST_DATA, "ItalyPowerDemand");
  const std::vector<ExperimentProblem> problems{{"ItalyPowerDemand", split.train, split.test}};

  SUBCASE("fold 0 is the original split") {
    ExperimentOptions o;
    const auto report = run_experiment({"ed"}, problems, o);
    REQUIRE(report.table.size() == 1);
    const auto* r = report.table.find("ed", "ItalyPowerDemand", 0);
    REQUIRE(r);
    NearestNeighbor direct("ed", DistanceSpec::ed());
    direct.fit(split.train);
    CHECK(r->test_accuracy == doctest::Approx(accuracy(direct, split.test)));
  }

  SUBCASE("same partitions for every classifier, resumable, idempotent") {
    const auto out = temp_file("resume.csv");
    ExperimentOptions o;
    o.folds = 3;
    o.seed = 11;
    o.out = out;
    o.record_timing = false;
    const auto first = run_experiment({"ed", "dtw"}, problems, o);
    CHECK(first.computed == 6);
    for (std::size_t f = 0; f < 3; ++f)
      CHECK(first.partitions.at({"ed", "ItalyPowerDemand", f}) == first.partitions.at({"dtw", "ItalyPowerDemand", f}));
    CHECK(first.partitions.at({"ed", "ItalyPowerDemand", 1}) != first.partitions.at({"ed", "ItalyPowerDemand", 2}));

    int calls = 0;
    const ClassifierFactory counting = [&](const std::string& n, std::uint64_t s) {
      ++calls;
      return make_classifier(n, s);
    };
    const auto second = run_experiment({"ed", "dtw"}, problems, o, counting);
    CHECK(second.computed == 0);
    CHECK(second.skipped == 6);
    CHECK(calls == 2);  // the up-front name check only
    CHECK(second.table.to_csv() == first.table.to_csv());
    CHECK(ResultsTable::read_csv(out).to_csv() == first.table.to_csv());
  }

  SUBCASE("a failing fold becomes an error row and is retried later") {
    const auto out = temp_file("fail.csv");
    bool broken = true;
    struct Failing : Classifier {
      std::string name() const override { return "flaky"; }
      void fit(const Dataset&) override { throw SizeError("flaky fit"); }
      std::vector<double> distribution(std::span<const double>) const override { return {1.0}; }
    };
    const ClassifierFactory factory = [&](const std::string& n, std::uint64_t s) -> std::unique_ptr<Classifier> {
      if (n == "flaky" && broken) return std::make_unique<Failing>();
      return make_classifier(n == "flaky" ? "ed" : n, s);
    };
    ExperimentOptions o;
    o.folds = 2;
    o.out = out;
    const auto first = run_experiment({"flaky", "ed"}, problems, o, factory);
    CHECK(first.failed == 2);
    CHECK(first.table.find("flaky", "ItalyPowerDemand", 1)->error == "flaky fit");
    CHECK(first.table.has_success("ed", "ItalyPowerDemand", 1));
    broken = false;
    const auto second = run_experiment({"flaky", "ed"}, problems, o, factory);
    CHECK(second.computed == 2);
    CHECK(second.failed == 0);
    CHECK(ResultsTable::read_csv(out).has_success("flaky", "ItalyPowerDemand", 1));
  }

  SUBCASE("unknown classifier is rejected before any work") {
    try {
      run_experiment({"ed", "dtw2"}, problems, {});
      FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
      CHECK(std::string(e.what()).find("cote-lite") != std::string::npos);
    }
    CHECK_THROWS_AS(run_experiment({"ed"}, problems, ExperimentOptions{0}), ParameterError);
  }
}

TEST_CASE("registry builds every listed classifier") {
  CHECK(classifier_names().size() == 23);
  for (const auto& n : classifier_names()) {
    const auto c = make_classifier(n, 1);
    REQUIRE(c);
    CHECK(c->name() == n);
  }
}
