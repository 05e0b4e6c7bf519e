// tsc: run experiments over UCR-format problems and summarise results files.
//
//   tsc run --classifier dtwcv --dataset ItalyPowerDemand --folds 1 --out results.csv
//   tsc compare results.csv --benchmark dtwcv --alpha 0.05
//   tsc cd results.csv --alpha 0.05
//
// Every flag can also come from a key=value file given with --config.
// Exit status: 0 success, 2 some folds failed, 1 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsc/error.hpp"
#include "tsc/experiment.hpp"
#include "tsc/parallel.hpp"
#include "tsc/registry.hpp"
#include "tsc/stats.hpp"
#include "tsc/ucr.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartial = 2;

struct RunArgs {
  std::vector<std::string> classifiers;
  std::vector<std::string> datasets;
  std::string data_dir = "data/ucr";
  std::size_t folds = 1;
  std::uint64_t seed = 0;
  std::string out = "results.csv";
  unsigned threads = 1;
  bool no_timing = false;
};

struct SummaryArgs {
  std::string results;
  std::string benchmark = "dtwcv";
  double alpha = 0.05;
  std::string out;
};

// A --dataset value is either a directory holding <name>_TRAIN.txt and
// <name>_TEST.txt or a problem name under --data-dir.
tsc::ExperimentProblem resolve(const std::string& value, const fs::path& root) {
  const fs::path direct(value);
  const std::string name = direct.filename().string();
  if (fs::is_directory(direct) && fs::exists(direct / (name + "_TRAIN.txt"))) {
    auto split = tsc::load_ucr_problem(direct.parent_path().empty() ? "." : direct.parent_path(), name);
    return {name, std::move(split.train), std::move(split.test)};
  }
  auto split = tsc::load_ucr_problem(root, value);
  return {value, std::move(split.train), std::move(split.test)};
}

int run(const RunArgs& a) {
  tsc::set_thread_count(a.threads);
  std::vector<tsc::ExperimentProblem> problems;
  for (const auto& d : a.datasets) problems.push_back(resolve(d, a.data_dir));
  tsc::ExperimentOptions o;
  o.folds = a.folds;
  o.seed = a.seed;
  o.out = a.out;
  o.record_timing = !a.no_timing;
  const auto report = tsc::run_experiment(a.classifiers, problems, o);
  std::fprintf(stderr, "computed %zu, skipped %zu, failed %zu -> %s\n", report.computed, report.skipped,
               report.failed, a.out.c_str());
  for (const auto& r : report.table.records())
    if (r.failed()) std::fprintf(stderr, "error: %s %s fold %zu: %s\n", r.classifier.c_str(), r.dataset.c_str(), r.fold,
                                 r.error.c_str());
  return report.failed > 0 ? kPartial : kOk;
}

struct Grid {
  tsc::ResultsTable table;
  std::vector<std::string> classifiers, datasets;
  std::vector<std::vector<double>> scores;
};

Grid load_grid(const std::string& path) {
  if (!fs::exists(path)) throw tsc::InputError("results file " + path + " not found");
  Grid g;
  g.table = tsc::ResultsTable::read_csv(path);
  g.classifiers = g.table.classifiers();
  g.datasets = g.table.datasets();
  g.scores = tsc::accuracy_grid(g.table, g.classifiers, g.datasets);
  return g;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw tsc::InputError("cannot write " + out);
  f << text;
}

int compare(const SummaryArgs& a) {
  const Grid g = load_grid(a.results);
  if (std::find(g.classifiers.begin(), g.classifiers.end(), a.benchmark) == g.classifiers.end())
    throw tsc::InputError("benchmark '" + a.benchmark + "' has no results in " + a.results);
  std::string text = "classifier,benchmark,datasets,better,no_difference,worse,prop_better,mean_difference\n";
  char buf[256];
  for (const auto& c : g.classifiers) {
    if (c == a.benchmark) continue;
    const auto s = tsc::pairwise_summary(g.table, c, a.benchmark, a.alpha);
    std::snprintf(buf, sizeof buf, ",%zu,%zu,%zu,%zu,%.6f,%.6f\n", s.datasets, s.significantly_better,
                  s.no_difference, s.significantly_worse, s.prop_better, s.mean_difference);
    text += c + "," + a.benchmark + buf;
  }
  emit(text, a.out);
  return kOk;
}

int cd(const SummaryArgs& a) {
  const Grid g = load_grid(a.results);
  if (g.classifiers.size() < 2)
    throw tsc::ParameterError("cd needs at least 2 classifiers, found " + std::to_string(g.classifiers.size()));
  const auto f = tsc::friedman_test(g.scores);
  emit(tsc::cd_diagram_csv(g.classifiers, f.mean_ranks, g.datasets.size(), a.alpha), a.out);
  std::fprintf(stderr, "friedman chi2=%.6f iman-davenport F=%.6f\n", f.chi_square, f.iman_davenport);
  return kOk;
}

// CLI11's own config reader wants [section] headers for subcommand flags,
// so --config FILE is expanded here instead: each "key=value" line becomes
// "--key=value" right after the subcommand, where later command-line flags
// override it. List values are comma separated or given on repeated keys; the key "results" is the
// positional results file. Blank lines and '#' comments are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (file.empty()) return args;
  std::ifstream in(file);
  if (!in) throw tsc::InputError("cannot read config file " + file);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string t) {
    const auto a = t.find_first_not_of(" \t\r");
    const auto b = t.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw tsc::ParseError(file + " line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    tokens.push_back(key == "results" ? value : "--" + key + "=" + value);
  }
  const auto at = args.empty() ? args.end() : args.begin() + 1;
  args.insert(at, tokens.begin(), tokens.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time series classification experiments", "tsc"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "key=value file mirroring the subcommand's flags (give it after the subcommand)");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "fit classifiers on resampled folds and append to a results CSV");
  std::string names;
  for (const auto& n : tsc::classifier_names()) names += (names.empty() ? "" : ", ") + n;
  run_cmd->add_option("--classifier", ra.classifiers, "one of: " + names + " (repeat or comma-separate)")
      ->required()
      ->delimiter(',');
  run_cmd->add_option("--dataset", ra.datasets, "problem name under --data-dir, or a problem directory")
      ->required()
      ->delimiter(',');
  run_cmd->add_option("--data-dir", ra.data_dir, "root holding <Name>/<Name>_TRAIN.txt and _TEST.txt")
      ->capture_default_str();
  run_cmd->add_option("--folds", ra.folds, "resamples; fold 0 is the original split")->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", ra.seed)->capture_default_str();
  run_cmd->add_option("--out", ra.out, "results CSV, appended to and resumed from")->capture_default_str();
  run_cmd->add_option("--threads", ra.threads)->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-timing", ra.no_timing, "write train_ms as 0 for reproducible files");

  SummaryArgs ca;
  auto* compare_cmd = app.add_subcommand("compare", "pairwise significance summary against a benchmark");
  compare_cmd->add_option("results", ca.results)->required();
  compare_cmd->add_option("--benchmark", ca.benchmark)->capture_default_str();
  compare_cmd->add_option("--alpha", ca.alpha, "level of the per-dataset Wilcoxon test")->capture_default_str();
  compare_cmd->add_option("--out", ca.out, "write here instead of stdout");

  SummaryArgs da;
  auto* cd_cmd = app.add_subcommand("cd", "Friedman ranks and Nemenyi critical difference");
  cd_cmd->add_option("results", da.results)->required();
  cd_cmd->add_option("--alpha", da.alpha)->capture_default_str();
  cd_cmd->add_option("--out", da.out, "write here instead of stdout");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  std::reverse(args.begin(), args.end());  // CLI11 takes the vector back to front
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run_cmd) return run(ra);
    if (*compare_cmd) return compare(ca);
    if (*cd_cmd) return cd(da);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kConfigError;
}
