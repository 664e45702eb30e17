#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bhlab/features.hpp"
#include "bhlab/rng.hpp"

namespace bhlab::ml {

/// Flat binary tree node; `feature < 0` marks a leaf. Rows with
/// x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct RegressionTreeOptions {
  int max_depth = 10;
  std::size_t min_samples_split = 2;
};

using LeafValueFn = std::function<double(std::span<const std::size_t> rows)>;

/// CART regression tree minimizing squared error of `target` over `rows`;
/// each leaf's value comes from `leaf_value` on the rows that reach it.
DecisionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> target,
                                 std::span<const std::size_t> rows,
                                 const RegressionTreeOptions& options, const LeafValueFn& leaf_value);

struct GiniTreeOptions {
  int max_depth = -1;  // unlimited
  std::size_t max_features = 2;
  std::size_t min_samples_split = 2;
};

/// Gini classification tree over `rows` (duplicates allowed, as produced by
/// bootstrap sampling). Leaves hold the majority class, ties going to 0.
DecisionTree fit_gini_tree(const FeatureMatrix& x, std::span<const int> y,
                           std::span<const std::size_t> rows, const GiniTreeOptions& options,
                           Rng& rng);

}  // namespace bhlab::ml
