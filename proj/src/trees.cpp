#include "tsc/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsc/classifier.hpp"
#include "tsc/error.hpp"
#include "tsc/parallel.hpp"

namespace tsc {

namespace {

inline double xlog2x(double c) { return c > 0.0 ? c * std::log2(c) : 0.0; }

struct SplitChoice {
  double gain = 0.0;
  double threshold = 0.0;
};

// Best information-gain threshold for one attribute over rows.
SplitChoice best_threshold(const TabularDataset& data, const std::vector<std::size_t>& rows,
                           std::size_t feature, const std::vector<double>& total,
                           std::vector<std::pair<double, int>>& scratch) {
  const int c = data.class_count;
  scratch.clear();
  for (auto r : rows) scratch.emplace_back(data.x.at(r, feature), data.y[r]);
  std::sort(scratch.begin(), scratch.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SplitChoice best;
  if (scratch.front().first == scratch.back().first) return best;

  const double n = static_cast<double>(rows.size());
  double parent = xlog2x(n);
  for (int k = 0; k < c; ++k) parent -= xlog2x(total[k]);

  std::vector<double> left(c, 0.0);
  double nl = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
    left[scratch[i].second] += 1.0;
    nl += 1.0;
    if (!(scratch[i].first < scratch[i + 1].first)) continue;
    const double nr = n - nl;
    double cost = xlog2x(nl) + xlog2x(nr);
    for (int k = 0; k < c; ++k) cost -= xlog2x(left[k]) + xlog2x(total[k] - left[k]);
    if (cost < best_cost) {
      best_cost = cost;
      const double lo = scratch[i].first, hi = scratch[i + 1].first;
      double mid = lo + (hi - lo) / 2.0;
      if (!(mid < hi)) mid = lo;
      best.threshold = mid;
    }
  }
  best.gain = (parent - best_cost) / n;
  return best;
}

}  // namespace

void RandomTree::fit(const TabularDataset& data, std::span<const std::size_t> rows,
                     const TreeOptions& options, Rng& rng) {
  if (rows.empty()) throw InputError("cannot build a tree from no rows");
  const std::size_t f = data.width();
  if (f == 0) throw InputError("cannot build a tree with no attributes");
  class_count_ = data.class_count;
  const int c = class_count_;
  std::size_t k = options.attributes_per_node;
  if (k == 0) k = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(f)))) + 1;
  k = std::min(k, f);

  nodes_.assign(1, Node{});
  dists_.clear();
  depth_ = 0;

  struct Work {
    int node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<Work> stack;
  stack.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end()), 0});
  std::vector<std::size_t> order(f);
  std::vector<std::pair<double, int>> scratch;
  std::vector<double> counts(c);

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    depth_ = std::max(depth_, w.depth);
    std::fill(counts.begin(), counts.end(), 0.0);
    for (auto r : w.rows) counts[data.y[r]] += 1.0;
    const auto present = std::count_if(counts.begin(), counts.end(), [](double v) { return v > 0; });

    bool leaf = present <= 1 || w.rows.size() < 2 ||
                (options.max_depth > 0 && w.depth >= options.max_depth);
    int best_feature = -1;
    SplitChoice best;
    std::vector<int> tried;
    if (!leaf) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(std::span(order));
      bool found = false;
      std::size_t evaluated = 0;
      for (std::size_t idx = 0; idx < f; ++idx) {
        if (evaluated >= k && found) break;
        const std::size_t a = order[idx];
        ++evaluated;
        if (options.record_candidates) tried.push_back(static_cast<int>(a));
        const auto choice = best_threshold(data, w.rows, a, counts, scratch);
        if (choice.gain > 1e-12) found = true;
        if (choice.gain > 1e-12 && choice.gain > best.gain) {
          best = choice;
          best_feature = static_cast<int>(a);
        }
      }
      leaf = best_feature < 0;
    }

    if (leaf) {
      nodes_[w.node].dist = dists_.size();
      const double total = static_cast<double>(w.rows.size());
      for (int j = 0; j < c; ++j) dists_.push_back(counts[j] / total);
      continue;
    }
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : w.rows)
      (data.x.at(r, best_feature) <= best.threshold ? left_rows : right_rows).push_back(r);
    const int left = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    Node& node = nodes_[w.node];
    node.feature = best_feature;
    node.threshold = best.threshold;
    node.gain = best.gain;
    node.left = left;
    node.right = left + 1;
    node.candidates = std::move(tried);
    stack.push_back({left + 1, std::move(right_rows), w.depth + 1});
    stack.push_back({left, std::move(left_rows), w.depth + 1});
  }
}

void RandomTree::fit(const TabularDataset& data, const TreeOptions& options, std::uint64_t seed) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(seed);
  fit(data, rows, options, rng);
}

std::span<const double> RandomTree::distribution(std::span<const double> row) const {
  if (nodes_.empty()) throw InputError("tree is not fitted");
  int at = 0;
  while (nodes_[at].feature >= 0)
    at = row[nodes_[at].feature] <= nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
  return {dists_.data() + nodes_[at].dist, static_cast<std::size_t>(class_count_)};
}

int RandomTree::predict(std::span<const double> row) const { return argmax(distribution(row)); }

std::size_t RandomTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

void RandomForest::grow(const TabularDataset& data, std::size_t count) {
  const std::size_t n = data.size();
  const int c = class_count_;
  const std::size_t start = trees_.size();
  trees_.resize(start + count);
  // Per-tree OOB contributions, summed afterwards in tree order.
  std::vector<std::vector<std::pair<std::size_t, std::vector<double>>>> oob(count);
  parallel_for(count, [&](std::size_t t) {
    Rng rng(options_.seed + start + t);
    std::vector<std::size_t> rows(n);
    std::vector<char> in_bag(n, 0);
    for (auto& r : rows) {
      r = rng.index(n);
      in_bag[r] = 1;
    }
    trees_[start + t].fit(data, rows, options_.tree, rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      auto d = trees_[start + t].distribution(data.x.row(i));
      oob[t].emplace_back(i, std::vector<double>(d.begin(), d.end()));
    }
  });
  for (const auto& contributions : oob)
    for (const auto& [i, d] : contributions) {
      for (int k = 0; k < c; ++k) oob_sum_[i * c + k] += d[k];
      ++oob_votes_[i];
    }
}

void RandomForest::fit(const TabularDataset& data) {
  data.validate();
  if (data.size() < 2) throw InputError("a forest needs at least two rows");
  if (options_.trees == 0) throw ParameterError("a forest needs at least one tree");
  class_count_ = data.class_count;
  labels_ = data.y;
  trees_.clear();
  history_.clear();
  oob_sum_.assign(data.size() * class_count_, 0.0);
  oob_votes_.assign(data.size(), 0);
  grow(data, options_.trees);
  history_.push_back(oob_error());
}

void RandomForest::fit_incremental(const TabularDataset& data, const IncrementalPolicy& policy) {
  data.validate();
  if (data.size() < 2) throw InputError("a forest needs at least two rows");
  if (policy.step == 0 || policy.max_trees == 0) throw ParameterError("bad incremental policy");
  class_count_ = data.class_count;
  labels_ = data.y;
  trees_.clear();
  history_.clear();
  oob_sum_.assign(data.size() * class_count_, 0.0);
  oob_votes_.assign(data.size(), 0);
  grow(data, std::min(policy.step, policy.max_trees));
  double previous = oob_error();
  history_.push_back(previous);
  while (trees_.size() < policy.max_trees) {
    grow(data, std::min(policy.step, policy.max_trees - trees_.size()));
    const double error = oob_error();
    history_.push_back(error);
    if (!(error < previous)) break;
    previous = error;
  }
}

std::vector<double> RandomForest::distribution(std::span<const double> row) const {
  if (trees_.empty()) throw InputError("forest is not fitted");
  std::vector<double> sum(class_count_, 0.0);
  for (const auto& tree : trees_) {
    auto d = tree.distribution(row);
    for (int k = 0; k < class_count_; ++k) sum[k] += d[k];
  }
  for (auto& v : sum) v /= static_cast<double>(trees_.size());
  return sum;
}

std::vector<double> RandomForest::oob_distribution(std::size_t i) const {
  const int c = class_count_;
  std::vector<double> out(c, 1.0 / c);
  if (oob_votes_[i] == 0) return out;
  for (int k = 0; k < c; ++k) out[k] = oob_sum_[i * c + k] / static_cast<double>(oob_votes_[i]);
  return out;
}

double RandomForest::oob_error() const {
  std::size_t counted = 0, wrong = 0;
  for (std::size_t i = 0; i < oob_votes_.size(); ++i) {
    if (oob_votes_[i] == 0) continue;
    ++counted;
    wrong += argmax(oob_distribution(i)) != labels_[i];
  }
  if (counted == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(wrong) / static_cast<double>(counted);
}

void RegressionTree::fit(const FeatureMatrix& x, std::span<const double> targets,
                         std::size_t max_depth, Rng& rng, std::size_t min_split) {
  if (x.rows() != targets.size()) throw SizeError("targets and rows differ in count");
  if (x.rows() == 0) throw InputError("cannot build a tree from no rows");
  if (max_depth == 0) throw ParameterError("regression tree depth must be at least 1");
  const std::size_t f = x.cols();
  nodes_.assign(1, Node{});
  leaf_values_.clear();
  leaf_count_ = 0;

  auto make_leaf = [&](int node, const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (auto r : rows) s += targets[r];
    nodes_[node].feature = -1;
    nodes_[node].leaf = leaf_count_++;
    leaf_values_.push_back(s / static_cast<double>(rows.size()));
  };

  std::vector<std::pair<int, std::vector<std::size_t>>> level;
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  level.emplace_back(0, std::move(all));
  std::vector<std::pair<double, double>> scratch;
  for (std::size_t depth = 0; !level.empty(); ++depth) {
    const std::size_t feature = depth < max_depth ? rng.index(f) : 0;
    std::vector<std::pair<int, std::vector<std::size_t>>> next;
    for (auto& [node, rows] : level) {
      bool constant = true;
      for (auto r : rows) constant = constant && targets[r] == targets[rows.front()];
      if (depth >= max_depth || rows.size() < std::max<std::size_t>(min_split, 2) || constant) {
        make_leaf(node, rows);
        continue;
      }
      scratch.clear();
      for (auto r : rows) scratch.emplace_back(x.at(r, feature), targets[r]);
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double total = 0.0, total_sq = 0.0;
      for (const auto& [v, t] : scratch) total += t, total_sq += t * t;
      const double n = static_cast<double>(scratch.size());
      const double parent_sse = total_sq - total * total / n;
      double best_sse = parent_sse, threshold = 0.0;
      bool split = false;
      double ls = 0.0, lsq = 0.0;
      for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
        ls += scratch[i].second;
        lsq += scratch[i].second * scratch[i].second;
        if (!(scratch[i].first < scratch[i + 1].first)) continue;
        const double nl = static_cast<double>(i + 1), nr = n - nl;
        const double rs = total - ls, rsq = total_sq - lsq;
        const double sse = (lsq - ls * ls / nl) + (rsq - rs * rs / nr);
        if (sse < best_sse - 1e-12 * std::max(1.0, parent_sse)) {
          best_sse = sse;
          const double lo = scratch[i].first, hi = scratch[i + 1].first;
          threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          split = true;
        }
      }
      if (!split) {
        make_leaf(node, rows);
        continue;
      }
      std::vector<std::size_t> left_rows, right_rows;
      for (auto r : rows) (x.at(r, feature) <= threshold ? left_rows : right_rows).push_back(r);
      const int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      nodes_[node].feature = static_cast<int>(feature);
      nodes_[node].threshold = threshold;
      nodes_[node].left = left;
      nodes_[node].right = left + 1;
      next.emplace_back(left, std::move(left_rows));
      next.emplace_back(left + 1, std::move(right_rows));
    }
    level = std::move(next);
  }
}

std::size_t RegressionTree::leaf_index(std::span<const double> row) const {
  if (nodes_.empty()) throw InputError("tree is not fitted");
  int at = 0;
  while (nodes_[at].feature >= 0)
    at = row[nodes_[at].feature] <= nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
  return nodes_[at].leaf;
}

}  // namespace tsc
