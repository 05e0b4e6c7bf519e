#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsc/dataset.hpp"

namespace tsc {

struct ResampleSpec {
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;

  /// "<seed>:<fold>", the form written to results files.
  std::string to_string() const;
};

struct Resample {
  Dataset train;
  Dataset test;
  /// Positions of each case in the pooled (train then test) list.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;

  /// FNV-1a hash of the index partition; equal folds hash equal.
  std::uint64_t partition_hash() const;
};

/// Stratified re-partition of the pooled train+test cases. Fold 0 is the
/// original split. Other folds shuffle each class's pooled indices with a
/// generator seeded by (seed XOR fold) and take the original per-class train
/// count. Cases keep pooled order inside each partition.
/// Throws SizeError if spec sizes disagree with the given split.
Resample stratified_resample(const Dataset& train, const Dataset& test, const ResampleSpec& spec);

/// Convenience: sizes taken from the split itself.
Resample stratified_resample(const Dataset& train, const Dataset& test, std::uint64_t seed,
                             std::size_t fold);

/// Stratified random subsample of at most cap cases (proportional per class,
/// at least one per present class). Returns indices in ascending order.
std::vector<std::size_t> stratified_subsample(const Dataset& data, std::size_t cap,
                                              std::uint64_t seed);

}  // namespace tsc
