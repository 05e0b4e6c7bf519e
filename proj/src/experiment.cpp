#include "tsc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "tsc/error.hpp"
#include "tsc/parallel.hpp"
#include "tsc/registry.hpp"
#include "tsc/resample.hpp"
#include "tsc/stats.hpp"

namespace tsc {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("results line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

void ResultsTable::add(ResultRecord r) {
  if (!r.failed()) {
    if (!(r.test_accuracy >= 0.0 && r.test_accuracy <= 1.0))
      throw RangeError("test accuracy outside [0,1] for " + r.classifier + "/" + r.dataset);
    if (!std::isnan(r.train_accuracy) && !(r.train_accuracy >= 0.0 && r.train_accuracy <= 1.0))
      throw RangeError("train accuracy outside [0,1] for " + r.classifier + "/" + r.dataset);
  }
  auto key = std::make_tuple(r.classifier, r.dataset, r.fold);
  rows_[std::move(key)] = std::move(r);
}

const ResultRecord* ResultsTable::find(const std::string& c, const std::string& d, std::size_t fold) const {
  const auto it = rows_.find(std::make_tuple(c, d, fold));
  return it == rows_.end() ? nullptr : &it->second;
}

bool ResultsTable::has_success(const std::string& c, const std::string& d, std::size_t fold) const {
  const auto* r = find(c, d, fold);
  return r && !r->failed();
}

std::vector<ResultRecord> ResultsTable::records() const {
  std::vector<ResultRecord> out;
  out.reserve(rows_.size());
  for (const auto& [key, r] : rows_) out.push_back(r);
  return out;
}

std::vector<std::string> ResultsTable::classifiers() const {
  std::set<std::string> s;
  for (const auto& [key, r] : rows_) s.insert(r.classifier);
  return {s.begin(), s.end()};
}

std::vector<std::string> ResultsTable::datasets() const {
  std::set<std::string> s;
  for (const auto& [key, r] : rows_) s.insert(r.dataset);
  return {s.begin(), s.end()};
}

std::map<std::size_t, double> ResultsTable::fold_accuracies(const std::string& c, const std::string& d) const {
  std::map<std::size_t, double> out;
  for (auto it = rows_.lower_bound(std::make_tuple(c, d, std::size_t{0}));
       it != rows_.end() && it->second.classifier == c && it->second.dataset == d; ++it)
    if (!it->second.failed()) out[it->second.fold] = it->second.test_accuracy;
  return out;
}

std::optional<double> ResultsTable::mean_accuracy(const std::string& c, const std::string& d) const {
  const auto folds = fold_accuracies(c, d);
  if (folds.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [f, a] : folds) sum += a;
  return sum / static_cast<double>(folds.size());
}

std::string ResultsTable::csv_row(const ResultRecord& r) {
  std::string out = quote(r.classifier) + "," + quote(r.dataset) + "," + std::to_string(r.fold) + ",";
  if (r.failed()) return out + "error,," + quote(r.error) + ",0";
  out += fixed(r.test_accuracy, 6) + ",";
  if (!std::isnan(r.train_accuracy)) out += fixed(r.train_accuracy, 6);
  return out + "," + quote(r.params) + "," + fixed(r.train_ms, 1);
}

std::string ResultsTable::to_csv() const {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& [key, r] : rows_) out += csv_row(r) + "\n";
  return out;
}

void ResultsTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_csv();
}

ResultsTable ResultsTable::read_csv(const std::filesystem::path& path) {
  ResultsTable table;
  std::ifstream in(path, std::ios::binary);
  if (!in) return table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (number == 1) {
      if (line != kHeader) throw ParseError("results file " + path.string() + " has an unexpected header");
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ParseError("results line " + std::to_string(number) + ": expected 7 fields");
    ResultRecord r;
    r.classifier = f[0];
    r.dataset = f[1];
    r.fold = static_cast<std::size_t>(parse_double(f[2], number));
    if (f[3] == "error") {
      r.error = f[5].empty() ? "unknown error" : f[5];
    } else {
      r.test_accuracy = parse_double(f[3], number);
      r.train_accuracy = f[4].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[4], number);
      r.params = f[5];
      r.train_ms = parse_double(f[6], number);
    }
    table.add(std::move(r));
  }
  return table;
}

ExperimentReport run_experiment(const std::vector<std::string>& classifiers,
                                const std::vector<ExperimentProblem>& problems, const ExperimentOptions& options,
                                const ClassifierFactory& factory_in) {
  if (options.folds < 1) throw ParameterError("folds must be at least 1");
  const ClassifierFactory factory =
      factory_in ? factory_in : ClassifierFactory([](const std::string& n, std::uint64_t s) { return make_classifier(n, s); });
  for (const auto& name : classifiers) factory(name, options.seed);  // validates names up front

  ExperimentReport report;
  if (options.out) report.table = ResultsTable::read_csv(*options.out);

  struct Task {
    std::size_t classifier, problem, fold;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < problems.size(); ++p)
    for (std::size_t f = 0; f < options.folds; ++f)
      for (std::size_t c = 0; c < classifiers.size(); ++c) {
        if (report.table.has_success(classifiers[c], problems[p].name, f))
          ++report.skipped;
        else
          tasks.push_back({c, p, f});
      }

  // One resample per (problem, fold), shared by every classifier.
  std::map<std::pair<std::size_t, std::size_t>, Resample> splits;
  for (const auto& t : tasks) {
    const auto key = std::make_pair(t.problem, t.fold);
    if (!splits.count(key))
      splits.emplace(key, stratified_resample(problems[t.problem].train, problems[t.problem].test, options.seed, t.fold));
  }

  std::ofstream log;
  if (options.out && !tasks.empty()) {
    const bool fresh = !std::filesystem::exists(*options.out) || std::filesystem::file_size(*options.out) == 0;
    log.open(*options.out, std::ios::binary | std::ios::app);
    if (!log) throw InputError("cannot write " + options.out->string());
    if (fresh) log << ResultsTable::kHeader << "\n" << std::flush;
  }

  std::vector<ResultRecord> done(tasks.size());
  std::mutex writer;
  auto run_one = [&](std::size_t i) {
    const Task& t = tasks[i];
    const Resample& split = splits.at({t.problem, t.fold});
    ResultRecord r;
    r.classifier = classifiers[t.classifier];
    r.dataset = problems[t.problem].name;
    r.fold = t.fold;
    try {
      auto model = factory(r.classifier, options.seed + t.fold);
      const auto start = std::chrono::steady_clock::now();
      model->fit(split.train);
      const auto stop = std::chrono::steady_clock::now();
      r.test_accuracy = accuracy(*model, split.test);
      r.train_accuracy = model->train_accuracy();
      r.params = model->selected_params();
      r.train_ms = options.record_timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
    } catch (const std::exception& e) {
      r.error = e.what();
      if (r.error.empty()) r.error = "unknown error";
    }
    std::lock_guard lock(writer);
    if (log.is_open()) log << ResultsTable::csv_row(r) << "\n" << std::flush;
    done[i] = std::move(r);
  };
  // Enough independent triples to fill the pool: parallelise across them.
  // Otherwise run them in turn and let each classifier use the workers.
  if (tasks.size() >= thread_count())
    parallel_for(tasks.size(), run_one);
  else
    for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    report.partitions[{classifiers[t.classifier], problems[t.problem].name, t.fold}] =
        splits.at({t.problem, t.fold}).partition_hash();
    if (done[i].failed()) ++report.failed;
    ++report.computed;
    report.table.add(std::move(done[i]));
  }
  return report;
}

std::vector<std::vector<double>> accuracy_grid(const ResultsTable& table, const std::vector<std::string>& classifiers,
                                               const std::vector<std::string>& datasets) {
  std::vector<std::vector<double>> grid(classifiers.size(), std::vector<double>(datasets.size()));
  std::string holes;
  for (std::size_t c = 0; c < classifiers.size(); ++c)
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const auto m = table.mean_accuracy(classifiers[c], datasets[d]);
      if (m)
        grid[c][d] = *m;
      else
        holes += "\n  " + classifiers[c] + " x " + datasets[d];
    }
  if (!holes.empty()) throw InputError("incomplete results grid, missing:" + holes);
  return grid;
}

PairwiseSummary pairwise_summary(const ResultsTable& table, const std::string& classifier,
                                 const std::string& benchmark, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  PairwiseSummary s;
  double diff_sum = 0.0;
  for (const auto& dataset : table.datasets()) {
    const auto a = table.fold_accuracies(classifier, dataset);
    const auto b = table.fold_accuracies(benchmark, dataset);
    std::vector<double> xa, xb;
    for (const auto& [fold, acc] : a)
      if (const auto it = b.find(fold); it != b.end()) {
        xa.push_back(acc);
        xb.push_back(it->second);
      }
    if (xa.empty()) continue;
    ++s.datasets;
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      mean_a += xa[i];
      mean_b += xb[i];
    }
    mean_a /= static_cast<double>(xa.size());
    mean_b /= static_cast<double>(xb.size());
    diff_sum += mean_a - mean_b;

    const auto d = differences(xa, xb);
    const auto nonzero = std::count_if(d.begin(), d.end(), [](double v) { return v != 0.0; });
    const bool significant = nonzero >= 5 && wilcoxon_signrank(xa, xb) < alpha;
    if (significant && mean_a > mean_b)
      ++s.significantly_better;
    else if (significant && mean_a < mean_b)
      ++s.significantly_worse;
    else
      ++s.no_difference;
  }
  if (s.datasets == 0)
    throw InputError("no dataset has results for both " + classifier + " and " + benchmark);
  s.prop_better = static_cast<double>(s.significantly_better) / static_cast<double>(s.datasets);
  s.mean_difference = diff_sum / static_cast<double>(s.datasets);
  return s;
}

std::string cd_diagram_csv(const std::vector<std::string>& classifiers, const std::vector<double>& mean_ranks,
                           std::size_t datasets, double alpha) {
  if (classifiers.size() != mean_ranks.size()) throw SizeError("one mean rank per classifier required");
  const double cd = nemenyi_cd(classifiers.size(), datasets, alpha);
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "alpha,k,N,cd\n%g,%zu,%zu,%.6f\nclassifier,mean_rank\n", alpha,
                classifiers.size(), datasets, cd);
  out << buf;
  std::vector<std::size_t> order(classifiers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mean_ranks[a] != mean_ranks[b]) return mean_ranks[a] < mean_ranks[b];
    return classifiers[a] < classifiers[b];
  });
  for (std::size_t i : order) {
    std::snprintf(buf, sizeof buf, ",%.6f\n", mean_ranks[i]);
    out << quote(classifiers[i]) << buf;
  }
  return out.str();
}

}  // namespace tsc
