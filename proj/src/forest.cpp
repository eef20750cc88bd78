#include "laburst/forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "laburst/rng.hpp"

namespace laburst {
namespace {

struct NodeTask {
  std::int32_t node;
  std::vector<std::uint32_t> samples;
};

double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

SplitChoice best_split(const Dataset& data,
                       const std::vector<std::uint32_t>& samples,
                       std::span<const int> candidate_features,
                       std::vector<std::pair<double, int>>& scratch) {
  const double total = static_cast<double>(samples.size());
  double pos = 0.0;
  for (auto i : samples) pos += data.y[i] > 0 ? 1.0 : 0.0;
  const double parent = gini(pos, total);

  SplitChoice best;
  for (const int f : candidate_features) {
    scratch.clear();
    for (auto i : samples) {
      scratch.emplace_back(data.x[i * data.dims + f], data.y[i]);
    }
    std::sort(scratch.begin(), scratch.end());
    if (scratch.front().first == scratch.back().first) continue;

    double left_pos = 0.0;
    double left_n = 0.0;
    for (std::size_t j = 0; j + 1 < scratch.size(); ++j) {
      left_pos += scratch[j].second > 0 ? 1.0 : 0.0;
      left_n += 1.0;
      if (scratch[j].first == scratch[j + 1].first) continue;
      const double right_n = total - left_n;
      const double right_pos = pos - left_pos;
      const double weighted = (left_n * gini(left_pos, left_n) +
                               right_n * gini(right_pos, right_n)) /
                              total;
      const double gain = parent - weighted;
      if (gain > best.gain + 1e-12) {
        best.gain = gain;
        best.feature = f;
        best.threshold =
            scratch[j].first + (scratch[j + 1].first - scratch[j].first) / 2.0;
        // Guard against midpoints collapsing onto the left value.
        if (best.threshold <= scratch[j].first) {
          best.threshold = scratch[j + 1].first;
        }
      }
    }
  }
  return best;
}

Tree train_tree(const Dataset& data, std::span<const int> mask,
                int max_features, std::span<const double> cdf, Rng& rng) {
  Tree tree;
  const std::size_t n = data.rows();

  std::vector<std::uint32_t> root(n);
  if (cdf.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      root[i] = static_cast<std::uint32_t>(rng.below(n));
    }
  } else {
    // Weighted bootstrap via inverse-CDF sampling.
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.next_unit();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      root[i] = static_cast<std::uint32_t>(
          std::min<std::size_t>(it - cdf.begin(), n - 1));
    }
  }

  std::vector<int> pool(mask.begin(), mask.end());
  std::vector<std::pair<double, int>> scratch;
  std::vector<NodeTask> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, std::move(root)});

  while (!stack.empty()) {
    NodeTask task = std::move(stack.back());
    stack.pop_back();
    auto& samples = task.samples;

    double pos = 0.0;
    for (auto i : samples) pos += data.y[i] > 0 ? 1.0 : 0.0;
    const double total = static_cast<double>(samples.size());
    const bool pure = pos == 0.0 || pos == total;

    SplitChoice split;
    if (!pure && samples.size() >= 2) {
      // Partial Fisher-Yates draw of max_features distinct dimensions.
      const int take =
          std::min<int>(max_features, static_cast<int>(pool.size()));
      for (int j = 0; j < take; ++j) {
        const std::size_t pick =
            j + static_cast<std::size_t>(rng.below(pool.size() - j));
        std::swap(pool[j], pool[pick]);
      }
      split = best_split(data, samples, {pool.data(), (std::size_t)take},
                         scratch);
      if (split.feature < 0 && take < static_cast<int>(pool.size())) {
        // Sampled dimensions were constant on this node; fall back to the
        // full mask so a splittable node is never forced into a leaf.
        split = best_split(data, samples, pool, scratch);
      }
    }

    if (split.feature < 0) {
      tree.nodes[task.node].feature = -1;
      tree.nodes[task.node].leaf_fraction = total > 0.0 ? pos / total : 0.0;
      continue;
    }

    std::vector<std::uint32_t> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    for (auto i : samples) {
      if (data.x[i * data.dims + split.feature] < split.threshold) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    if (left.empty() || right.empty()) {
      tree.nodes[task.node].feature = -1;
      tree.nodes[task.node].leaf_fraction = total > 0.0 ? pos / total : 0.0;
      continue;
    }

    const std::int32_t li = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::int32_t ri = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[task.node].feature = split.feature;
    tree.nodes[task.node].threshold = split.threshold;
    tree.nodes[task.node].left = li;
    tree.nodes[task.node].right = ri;
    stack.push_back({ri, std::move(right)});
    stack.push_back({li, std::move(left)});
  }
  return tree;
}

}  // namespace

double Tree::leaf_fraction_for(std::span<const double> x) const {
  std::int32_t at = 0;
  while (!nodes[at].is_leaf()) {
    at = x[nodes[at].feature] < nodes[at].threshold ? nodes[at].left
                                                    : nodes[at].right;
  }
  return nodes[at].leaf_fraction;
}

double ForestModel::predict_score(std::span<const double> x) const {
  if (trees.empty()) return 0.0;
  std::size_t votes = 0;
  for (const Tree& t : trees) {
    if (t.leaf_fraction_for(x) >= 0.5) ++votes;
  }
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

ForestModel train_forest(const Dataset& data, const ForestConfig& cfg,
                         std::span<const int> feature_mask,
                         std::span<const double> weights, int threads) {
  if (!data.has_both_classes()) {
    throw std::invalid_argument("train_forest: both classes required");
  }
  ForestModel model;
  model.cfg = cfg;
  model.dims = data.dims;
  if (feature_mask.empty()) {
    for (std::size_t i = 0; i < data.dims; ++i) {
      model.feature_mask.push_back(static_cast<int>(i));
    }
  } else {
    model.feature_mask.assign(feature_mask.begin(), feature_mask.end());
  }

  std::vector<double> cdf;
  if (!weights.empty()) {
    cdf.resize(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      cdf[i] = acc;
    }
    for (double& v : cdf) v /= acc;
  }

  model.trees.resize(cfg.n_trees);
  const int n_threads = std::max(1, threads);
  auto work = [&](int from, int to) {
    for (int t = from; t < to; ++t) {
      Rng rng(Rng::mix(cfg.rng_seed, static_cast<std::uint64_t>(t)));
      model.trees[t] =
          train_tree(data, model.feature_mask, cfg.max_features, cdf, rng);
    }
  };
  if (n_threads == 1 || cfg.n_trees < 4) {
    work(0, cfg.n_trees);
  } else {
    std::vector<std::thread> pool;
    const int per = (cfg.n_trees + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int from = t * per;
      const int to = std::min(cfg.n_trees, from + per);
      if (from < to) pool.emplace_back(work, from, to);
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

}  // namespace laburst
