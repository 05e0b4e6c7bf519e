#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsc/dataset.hpp"

namespace tsc {

/// Maps label tokens to dense ids in first-appearance order. Shared between
/// the train and test files of one problem so both use the same ids.
class LabelMap {
 public:
  int id_for(const std::string& token);
  const std::vector<std::string>& names() const noexcept { return names_; }
  int size() const noexcept { return static_cast<int>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

/// Reads the UCR text format: one case per line, label first, then the
/// observations, comma separated. Numeric labels are canonicalised so "1"
/// and "1.0" name the same class.
Dataset load_ucr(const std::filesystem::path& path);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

TrainTestSplit load_ucr_split(const std::filesystem::path& train_path,
                              const std::filesystem::path& test_path);

/// Resolves <root>/<name>/<name>_TRAIN.txt and _TEST.txt.
TrainTestSplit load_ucr_problem(const std::filesystem::path& root, const std::string& name);

void write_ucr(const std::filesystem::path& path, const Dataset& data);

}  // namespace tsc
