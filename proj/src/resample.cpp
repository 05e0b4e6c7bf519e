#include "tsc/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsc/error.hpp"
#include "tsc/rng.hpp"

namespace tsc {

std::string ResampleSpec::to_string() const {
  return std::to_string(seed) + ":" + std::to_string(fold);
}

std::uint64_t Resample::partition_hash() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xFF;
      hash *= 1099511628211ULL;
    }
  };
  for (auto i : train_indices) mix(i);
  mix(~0ULL);
  for (auto i : test_indices) mix(i);
  return hash;
}

Resample stratified_resample(const Dataset& train, const Dataset& test, const ResampleSpec& spec) {
  if (spec.train_size != train.size() || spec.test_size != test.size())
    throw SizeError("resample sizes " + std::to_string(spec.train_size) + "/" +
                    std::to_string(spec.test_size) + " do not match the split " +
                    std::to_string(train.size()) + "/" + std::to_string(test.size()));
  if (train.class_count() != test.class_count())
    throw InputError("train and test use different label spaces");

  const Dataset pooled = concatenate(train, test);
  Resample out;
  if (spec.fold == 0) {
    out.train_indices.resize(train.size());
    std::iota(out.train_indices.begin(), out.train_indices.end(), 0);
    out.test_indices.resize(test.size());
    std::iota(out.test_indices.begin(), out.test_indices.end(), train.size());
    out.train = train;
    out.test = test;
    return out;
  }

  const auto train_counts = train.class_counts();
  std::vector<bool> in_train(pooled.size(), false);
  for (int c = 0; c < pooled.class_count(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pooled.size(); ++i)
      if (pooled.label(i) == c) members.push_back(i);
    Rng rng(spec.seed ^ static_cast<std::uint64_t>(spec.fold));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = 0; k < train_counts[static_cast<std::size_t>(c)]; ++k)
      in_train[members[k]] = true;
  }
  for (std::size_t i = 0; i < pooled.size(); ++i)
    (in_train[i] ? out.train_indices : out.test_indices).push_back(i);
  out.train = pooled.subset(out.train_indices);
  out.test = pooled.subset(out.test_indices);
  return out;
}

Resample stratified_resample(const Dataset& train, const Dataset& test, std::uint64_t seed,
                             std::size_t fold) {
  return stratified_resample(train, test, ResampleSpec{seed, fold, train.size(), test.size()});
}

std::vector<std::size_t> stratified_subsample(const Dataset& data, std::size_t cap,
                                              std::uint64_t seed) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  if (data.size() <= cap) return all;
  const auto counts = data.class_counts();
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (int c = 0; c < data.class_count(); ++c) {
    const std::size_t count = counts[static_cast<std::size_t>(c)];
    if (count == 0) continue;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.label(i) == c) members.push_back(i);
    rng.shuffle(std::span<std::size_t>(members));
    const auto share = static_cast<std::size_t>(std::floor(
        static_cast<double>(cap) * static_cast<double>(count) / static_cast<double>(data.size())));
    const std::size_t take = std::clamp<std::size_t>(share, 1, count);
    chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<long>(take));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace tsc
