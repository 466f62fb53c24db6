#include "relsifter/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relsifter/errors.hpp"
#include "relsifter/rng.hpp"

namespace relsifter {

namespace {

struct DenseData {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;  // row-major
  std::span<const int> labels;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

double gini(const std::array<std::uint32_t, kNumScores>& counts, double n) {
  double sum_sq = 0;
  for (std::uint32_t c : counts) {
    const double p = static_cast<double>(c) / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct SplitChoice {
  bool found = false;
  std::uint32_t feature = 0;
  double threshold = 0;
  double impurity = 0;  // weighted child Gini, lower is better
};

class TreeBuilder {
 public:
  TreeBuilder(const DenseData& data, std::uint32_t min_leaf, Rng& rng)
      : data_(data), min_leaf_(min_leaf), rng_(rng) {
    feature_pool_.resize(data.cols);
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0u);
    subset_size_ = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(data.cols))));
    if (subset_size_ == 0) subset_size_ = 1;
  }

  Tree build(std::vector<std::uint32_t> indices) {
    Tree tree;
    grow(tree, std::move(indices));
    return tree;
  }

 private:
  std::int32_t grow(Tree& tree, std::vector<std::uint32_t> indices) {
    std::array<std::uint32_t, kNumScores> counts{};
    for (std::uint32_t i : indices) ++counts[data_.labels[i]];
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; }) <= 1;

    const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].counts = counts;
    if (pure || indices.size() <= min_leaf_) return id;

    SplitChoice split = best_split_random_subset(indices, counts);
    // The drawn subset can be constant on this node while other features
    // still separate it; fall back to the full feature set before giving up.
    if (!split.found) split = best_split(indices, counts, feature_pool_);
    if (!split.found) return id;  // duplicate rows, mixed labels

    std::vector<std::uint32_t> left, right;
    for (std::uint32_t i : indices) {
      if (data_.at(i, split.feature) <= split.threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    tree.nodes[id].feature = static_cast<std::int32_t>(split.feature);
    tree.nodes[id].threshold = split.threshold;
    const std::int32_t l = grow(tree, std::move(left));
    tree.nodes[id].left = l;
    const std::int32_t r = grow(tree, std::move(right));
    tree.nodes[id].right = r;
    return id;
  }

  SplitChoice best_split_random_subset(const std::vector<std::uint32_t>& indices,
                                       const std::array<std::uint32_t, kNumScores>& counts) {
    // Partial Fisher-Yates: the first subset_size_ entries become the draw.
    for (std::size_t i = 0; i < subset_size_; ++i) {
      const std::size_t j =
          i + rng_.below(static_cast<std::uint32_t>(feature_pool_.size() - i));
      std::swap(feature_pool_[i], feature_pool_[j]);
    }
    return best_split(indices, counts,
                      std::span<const std::uint32_t>(feature_pool_.data(), subset_size_));
  }

  SplitChoice best_split(const std::vector<std::uint32_t>& indices,
                         const std::array<std::uint32_t, kNumScores>& total,
                         std::span<const std::uint32_t> features) {
    const double n = static_cast<double>(indices.size());
    SplitChoice best;
    for (std::uint32_t f : features) {
      order_.assign(indices.begin(), indices.end());
      std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = data_.at(a, f), vb = data_.at(b, f);
        if (va != vb) return va < vb;
        return a < b;
      });

      std::array<std::uint32_t, kNumScores> left_counts{};
      auto right_counts = total;
      for (std::size_t pos = 0; pos + 1 < order_.size(); ++pos) {
        const int label = data_.labels[order_[pos]];
        ++left_counts[label];
        --right_counts[label];
        const double v = data_.at(order_[pos], f);
        const double v_next = data_.at(order_[pos + 1], f);
        if (v == v_next) continue;

        const double n_left = static_cast<double>(pos + 1);
        const double n_right = n - n_left;
        const double impurity =
            (n_left * gini(left_counts, n_left) + n_right * gini(right_counts, n_right)) / n;
        if (!best.found || impurity < best.impurity) {
          best.found = true;
          best.feature = f;
          best.threshold = v + (v_next - v) / 2.0;
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const DenseData& data_;
  std::uint32_t min_leaf_;
  Rng& rng_;
  std::size_t subset_size_;
  std::vector<std::uint32_t> feature_pool_;
  std::vector<std::uint32_t> order_;
};

Tree fit_tree(const DenseData& data, std::uint32_t min_leaf, std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  const std::uint32_t n = static_cast<std::uint32_t>(data.rows);
  std::vector<std::uint32_t> bootstrap(n);
  for (std::uint32_t& i : bootstrap) i = rng.below(n);
  return TreeBuilder(data, min_leaf, rng).build(std::move(bootstrap));
}

}  // namespace

ForestModel fit_forest(const FeatureMatrix& X, std::span<const int> y,
                       std::uint32_t n_estimators, const ForestConfig& config) {
  if (X.rows() == 0) throw contract_error("forest: empty training set");
  if (y.size() != X.rows()) throw contract_error("forest: label/row mismatch");
  if (n_estimators == 0) throw contract_error("forest: need at least one tree");
  for (int label : y)
    if (label < 0 || label >= kNumScores) throw contract_error("forest: label outside 0..7");

  DenseData data;
  data.rows = X.rows();
  data.cols = std::max<std::size_t>(X.cols(), 1);  // degenerate 0-column input
  data.labels = y;
  data.values.assign(data.rows * data.cols, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const RowView row = X.row(i);
    for (std::size_t e = 0; e < row.cols.size(); ++e)
      data.values[i * data.cols + row.cols[e]] = row.vals[e];
  }

  ForestModel model;
  model.n_estimators = n_estimators;
  model.seed = config.seed;
  model.trees.resize(n_estimators);

  const std::int64_t nt = static_cast<std::int64_t>(n_estimators);
  if (config.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < nt; ++t)
      model.trees[static_cast<std::size_t>(t)] =
          fit_tree(data, config.min_leaf, mix_seed(config.seed, static_cast<std::uint64_t>(t)));
  } else {
    for (std::int64_t t = 0; t < nt; ++t)
      model.trees[static_cast<std::size_t>(t)] =
          fit_tree(data, config.min_leaf, mix_seed(config.seed, static_cast<std::uint64_t>(t)));
  }
  return model;
}

int predict_tree(const Tree& tree, RowView x) {
  const TreeNode* node = &tree.nodes[0];
  while (node->feature >= 0) {
    const double v = x.get(static_cast<std::uint32_t>(node->feature));
    node = &tree.nodes[v <= node->threshold ? node->left : node->right];
  }
  int best = 0;
  for (int label = 1; label < kNumScores; ++label)
    if (node->counts[label] > node->counts[best]) best = label;
  return best;
}

std::array<std::uint32_t, kNumScores> forest_votes(const ForestModel& model, RowView x) {
  std::array<std::uint32_t, kNumScores> votes{};
  for (const Tree& tree : model.trees) ++votes[predict_tree(tree, x)];
  return votes;
}

int predict_forest(const ForestModel& model, RowView x) {
  const auto votes = forest_votes(model, x);
  int best = 0;
  for (int label = 1; label < kNumScores; ++label)
    if (votes[label] > votes[best]) best = label;
  return best;
}

}  // namespace relsifter
