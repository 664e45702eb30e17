#include "bhlab/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace bhlab::ml {

double DecisionTree::predict(std::span<const double> x) const {
  std::int32_t i = 0;
  while (nodes_[i].feature >= 0) {
    const TreeNode& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

struct Split {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return m < b ? m : a;
}

// Sorts rows by feature value, ties by row index, so the scan is deterministic.
void sort_by_feature(const FeatureMatrix& x, std::size_t feature, std::vector<std::size_t>& rows) {
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    const double va = x(a, feature), vb = x(b, feature);
    return va != vb ? va < vb : a < b;
  });
}

// Scores every boundary between distinct values. `cost(k)` is the summed
// impurity of the split placing sorted[0..k] on the left.
template <typename Cost>
void scan_feature(const FeatureMatrix& x, std::size_t feature, const std::vector<std::size_t>& sorted,
                  Cost cost, Split& best) {
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    const double a = x(sorted[k], feature), b = x(sorted[k + 1], feature);
    if (!(a < b)) continue;
    const double s = cost(k);
    if (s < best.score) best = Split{true, feature, midpoint(a, b), s};
  }
}

class Builder {
 public:
  explicit Builder(const FeatureMatrix& x) : x_(x) {}

  std::vector<TreeNode> nodes;

  std::int32_t add_leaf(double value) {
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, value});
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::int32_t add_split(const Split& s) {
    nodes.push_back(TreeNode{static_cast<std::int32_t>(s.feature), s.threshold, -1, -1, 0.0});
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(
      const std::vector<std::size_t>& rows, const Split& s) const {
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (x_(r, s.feature) <= s.threshold ? left : right).push_back(r);
    return {std::move(left), std::move(right)};
  }

 private:
  const FeatureMatrix& x_;
};

struct RegressionContext {
  const FeatureMatrix& x;
  std::span<const double> target;
  const RegressionTreeOptions& options;
  const LeafValueFn& leaf_value;
  Builder& builder;

  std::int32_t grow(std::vector<std::size_t> rows, int depth) {
    const bool pure = std::all_of(rows.begin(), rows.end(),
                                  [&](std::size_t r) { return target[r] == target[rows.front()]; });
    Split best;
    if (!pure && depth < options.max_depth && rows.size() >= options.min_samples_split) {
      std::vector<std::size_t> sorted = rows;
      std::vector<double> prefix(rows.size() + 1), prefix_sq(rows.size() + 1);
      for (std::size_t f = 0; f < x.cols(); ++f) {
        sort_by_feature(x, f, sorted);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
          const double t = target[sorted[i]];
          prefix[i + 1] = prefix[i] + t;
          prefix_sq[i + 1] = prefix_sq[i] + t * t;
        }
        const double n = static_cast<double>(sorted.size());
        scan_feature(x, f, sorted, [&](std::size_t k) {
          const double nl = static_cast<double>(k + 1), nr = n - nl;
          const double sl = prefix[k + 1], sr = prefix[sorted.size()] - sl;
          const double ql = prefix_sq[k + 1], qr = prefix_sq[sorted.size()] - ql;
          return (ql - sl * sl / nl) + (qr - sr * sr / nr);
        }, best);
      }
    }
    if (!best.valid) return builder.add_leaf(leaf_value(rows));
    const std::int32_t id = builder.add_split(best);
    auto [left, right] = builder.partition(rows, best);
    rows.clear();
    const std::int32_t l = grow(std::move(left), depth + 1);
    const std::int32_t r = grow(std::move(right), depth + 1);
    builder.nodes[id].left = l;
    builder.nodes[id].right = r;
    return id;
  }
};

struct GiniContext {
  const FeatureMatrix& x;
  std::span<const int> y;
  const GiniTreeOptions& options;
  Rng& rng;
  Builder& builder;

  std::int32_t grow(std::vector<std::size_t> rows, int depth) {
    std::size_t positives = 0;
    for (std::size_t r : rows) positives += y[r] == 1;
    const bool pure = positives == 0 || positives == rows.size();
    const bool depth_ok = options.max_depth < 0 || depth < options.max_depth;

    Split best;
    if (!pure && depth_ok && rows.size() >= options.min_samples_split) {
      std::vector<std::size_t> order(x.cols());
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span<std::size_t>(order));
      std::vector<std::size_t> sorted = rows;
      std::vector<std::size_t> prefix_pos(rows.size() + 1);
      const double n = static_cast<double>(rows.size());
      // Draw features until max_features have been examined; keep drawing past
      // that only while no valid split has been found.
      for (std::size_t drawn = 0; drawn < order.size(); ++drawn) {
        if (drawn >= options.max_features && best.valid) break;
        const std::size_t f = order[drawn];
        sort_by_feature(x, f, sorted);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
          prefix_pos[i + 1] = prefix_pos[i] + (y[sorted[i]] == 1);
        }
        scan_feature(x, f, sorted, [&](std::size_t k) {
          const double nl = static_cast<double>(k + 1), nr = n - nl;
          const double pl = static_cast<double>(prefix_pos[k + 1]);
          const double pr = static_cast<double>(positives) - pl;
          const double gl = nl - (pl * pl + (nl - pl) * (nl - pl)) / nl;
          const double gr = nr - (pr * pr + (nr - pr) * (nr - pr)) / nr;
          return gl + gr;
        }, best);
      }
    }
    if (!best.valid) {
      return builder.add_leaf(2 * positives > rows.size() ? 1.0 : 0.0);
    }
    const std::int32_t id = builder.add_split(best);
    auto [left, right] = builder.partition(rows, best);
    rows.clear();
    const std::int32_t l = grow(std::move(left), depth + 1);
    const std::int32_t r = grow(std::move(right), depth + 1);
    builder.nodes[id].left = l;
    builder.nodes[id].right = r;
    return id;
  }
};

}  // namespace

DecisionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> target,
                                 std::span<const std::size_t> rows,
                                 const RegressionTreeOptions& options, const LeafValueFn& leaf_value) {
  Builder builder(x);
  RegressionContext ctx{x, target, options, leaf_value, builder};
  ctx.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
  return DecisionTree(std::move(builder.nodes));
}

DecisionTree fit_gini_tree(const FeatureMatrix& x, std::span<const int> y,
                           std::span<const std::size_t> rows, const GiniTreeOptions& options,
                           Rng& rng) {
  Builder builder(x);
  GiniContext ctx{x, y, options, rng, builder};
  ctx.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
  return DecisionTree(std::move(builder.nodes));
}

}  // namespace bhlab::ml
