#include "tsc/ucr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tsc/error.hpp"

namespace tsc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && !token.empty();
}

std::string canonical_label(std::string_view token) {
  double value = 0.0;
  if (parse_double(token, value) && std::isfinite(value)) {
    if (value == std::floor(value) && std::fabs(value) < 1e15)
      return std::to_string(static_cast<long long>(value));
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
  }
  return std::string(token);
}

struct RawCases {
  std::vector<Series> series;
  std::vector<int> labels;
};

RawCases read_cases(const std::filesystem::path& path, LabelMap& labels) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file " + path.string());
  RawCases cases;
  std::string line;
  std::size_t line_number = 0;
  std::size_t length = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    Series values;
    std::string label;
    std::size_t field = 0;
    while (true) {
      const std::size_t comma = view.find(',');
      std::string_view token = trim(view.substr(0, comma));
      if (field == 0) {
        if (token.empty()) throw ParseError("empty label at line " + std::to_string(line_number));
        label = canonical_label(token);
      } else {
        double value = 0.0;
        if (!parse_double(token, value))
          throw ParseError("non-numeric token '" + std::string(token) + "' at line " +
                           std::to_string(line_number) + ", field " + std::to_string(field + 1));
        values.push_back(value);
      }
      ++field;
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (cases.series.empty()) {
      length = values.size();
      if (length < 2) throw FormatError("series must have at least two observations", line_number);
    } else if (values.size() != length) {
      throw FormatError("ragged series: " + std::to_string(values.size()) +
                            " observations, expected " + std::to_string(length),
                        line_number);
    }
    cases.labels.push_back(labels.id_for(label));
    cases.series.push_back(std::move(values));
  }
  if (cases.series.empty()) throw EmptyInputError("dataset file is empty: " + path.string());
  return cases;
}

}  // namespace

int LabelMap::id_for(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(names_.size());
  ids_.emplace(token, id);
  names_.push_back(token);
  return id;
}

Dataset load_ucr(const std::filesystem::path& path) {
  LabelMap labels;
  RawCases cases = read_cases(path, labels);
  return Dataset(std::move(cases.series), std::move(cases.labels), labels.size(), labels.names());
}

TrainTestSplit load_ucr_split(const std::filesystem::path& train_path,
                              const std::filesystem::path& test_path) {
  LabelMap labels;
  RawCases train = read_cases(train_path, labels);
  RawCases test = read_cases(test_path, labels);
  if (!train.series.empty() && !test.series.empty() &&
      train.series.front().size() != test.series.front().size())
    throw LengthError("train and test series lengths differ");
  const int classes = labels.size();
  return {Dataset(std::move(train.series), std::move(train.labels), classes, labels.names()),
          Dataset(std::move(test.series), std::move(test.labels), classes, labels.names())};
}

TrainTestSplit load_ucr_problem(const std::filesystem::path& root, const std::string& name) {
  const auto dir = root / name;
  const auto train = dir / (name + "_TRAIN.txt");
  const auto test = dir / (name + "_TEST.txt");
  if (!std::filesystem::exists(train) || !std::filesystem::exists(test))
    throw InputError("dataset '" + name + "' not found under " + root.string());
  return load_ucr_split(train, test);
}

void write_ucr(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  char buffer[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.class_names()[static_cast<std::size_t>(data.label(i))];
    for (double v : data.series(i)) {
      std::snprintf(buffer, sizeof buffer, "%.17g", v);
      out << ',' << buffer;
    }
    out << '\n';
  }
}

}  // namespace tsc
