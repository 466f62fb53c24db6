#ifndef RELSIFTER_FOREST_HPP
#define RELSIFTER_FOREST_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "relsifter/exec.hpp"
#include "relsifter/features.hpp"

namespace relsifter {

// Axis-aligned binary split; rows with x[feature] <= threshold go left.
// feature == -1 marks a leaf carrying label counts.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint32_t, kNumScores> counts{};
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::vector<Tree> trees;
  std::uint32_t n_estimators = 0;
  std::uint64_t seed = 0;
};

struct ForestConfig {
  std::uint64_t seed = 0;
  std::uint32_t min_leaf = 1;
  Exec exec = Exec::parallel;
};

// Bootstrap-aggregated CART trees: each tree sees n draws with replacement,
// each split searches a fresh random subset of ceil(sqrt(cols)) features by
// Gini impurity, and growth continues to purity or min_leaf. Tree t uses an
// independent generator seeded by mix_seed(seed, t), so serial and parallel
// fits build identical forests.
ForestModel fit_forest(const FeatureMatrix& X, std::span<const int> y,
                       std::uint32_t n_estimators, const ForestConfig& config = {});

// Per-label vote counts over trees; sums to n_estimators.
std::array<std::uint32_t, kNumScores> forest_votes(const ForestModel& model, RowView x);

// Majority vote; ties resolve to the lower label.
int predict_forest(const ForestModel& model, RowView x);

// Single-tree prediction (argmax of the reached leaf's counts, ties low).
int predict_tree(const Tree& tree, RowView x);

}  // namespace relsifter

#endif
