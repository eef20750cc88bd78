#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laburst/dataset.hpp"

namespace laburst {

struct ForestConfig {
  int n_trees = 1024;
  int max_features = 2;  // features considered per split
  std::uint64_t rng_seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;   // x[feature] < threshold
  std::int32_t right = -1;  // x[feature] >= threshold
  double leaf_fraction = 0.0;  // positive-class share at the leaf

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double leaf_fraction_for(std::span<const double> x) const;
};

// Bagged CART forest (Gini impurity, grown until pure or unsplittable,
// min-leaf 1). Trees index features of the full input vector; feature_mask
// records which dimensions splits were allowed to use.
struct ForestModel {
  ForestConfig cfg;
  std::size_t dims = 0;
  std::vector<int> feature_mask;
  std::vector<Tree> trees;

  // Fraction of trees voting bursty.
  double predict_score(std::span<const double> x) const;
  bool classify(std::span<const double> x) const {
    return predict_score(x) >= 0.5;
  }
};

// Deterministic given cfg.rng_seed. Optional per-example weights drive the
// bootstrap resampling (uniform when empty). Throws std::invalid_argument on
// single-class data.
ForestModel train_forest(const Dataset& data, const ForestConfig& cfg,
                         std::span<const int> feature_mask = {},
                         std::span<const double> weights = {},
                         int threads = 1);

}  // namespace laburst
