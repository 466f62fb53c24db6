#ifndef RELSIFTER_CV_HPP
#define RELSIFTER_CV_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "relsifter/errors.hpp"
#include "relsifter/evaluation.hpp"
#include "relsifter/exec.hpp"
#include "relsifter/features.hpp"
#include "relsifter/forest.hpp"
#include "relsifter/olr.hpp"

namespace relsifter {

// Stock grids: alpha penalties for the ordinal model, bag sizes for the
// forest.
inline const std::vector<double> kOlrAlphaGrid = {1, 5, 10, 15, 20, 50, 75, 100, 250, 500, 1000};
inline const std::vector<std::uint32_t> kForestSizeGrid = {10, 50, 100, 250, 500};

constexpr std::size_t kDefaultFolds = 10;
constexpr int kDefaultTolerance = 2;  // task accuracy: |predicted - gold| <= 2

// Seeded shuffle then contiguous split; fold sizes differ by at most one.
// Throws config_error when folds < 2 or n < folds.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds,
                                                 std::uint64_t seed);

// Learner adapters. The CV/grid templates require:
//   typename L::Model, typename L::Hyper,
//   Model fit(const FeatureMatrix&, std::span<const int>, Hyper) const,
//   int predict(const Model&, RowView) const.
struct OlrLearner {
  using Model = OrdinalModel;
  using Hyper = double;  // alpha
  OlrConfig config;

  Model fit(const FeatureMatrix& X, std::span<const int> y, Hyper alpha) const {
    return fit_olr(X, y, alpha, config);
  }
  int predict(const Model& m, RowView x) const { return predict_olr(m, x); }
};

struct ForestLearner {
  using Model = ForestModel;
  using Hyper = std::uint32_t;  // n_estimators
  ForestConfig config;

  Model fit(const FeatureMatrix& X, std::span<const int> y, Hyper n_estimators) const {
    return fit_forest(X, y, n_estimators, config);
  }
  int predict(const Model& m, RowView x) const { return predict_forest(m, x); }
};

namespace detail {

// Task accuracy of one train/test split.
template <class Learner>
double fold_accuracy(const FeatureMatrix& X, std::span<const int> y, const Learner& learner,
                     typename Learner::Hyper hyper, std::span<const std::size_t> train,
                     std::span<const std::size_t> test, int tolerance) {
  const FeatureMatrix train_m = X.select(train);
  std::vector<int> train_y(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) train_y[i] = y[train[i]];
  const typename Learner::Model model = learner.fit(train_m, train_y, hyper);

  std::size_t hits = 0;
  for (std::size_t i : test)
    if (std::abs(learner.predict(model, X.row(i)) - y[i]) <= tolerance) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

inline std::vector<std::size_t> train_indices(const std::vector<std::vector<std::size_t>>& folds,
                                              std::size_t held_out) {
  std::vector<std::size_t> train;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != held_out) train.insert(train.end(), folds[f].begin(), folds[f].end());
  return train;
}

}  // namespace detail

// Mean held-out task accuracy over seeded folds. Deterministic for both
// execution policies: fold results land in a fixed slot and are reduced in
// fold order.
template <class Learner>
double cross_validate(const FeatureMatrix& X, std::span<const int> y, const Learner& learner,
                      typename Learner::Hyper hyper, std::size_t folds, std::uint64_t seed,
                      int tolerance = kDefaultTolerance, Exec exec = Exec::parallel) {
  if (y.size() != X.rows()) throw contract_error("cv: label/row mismatch");
  const auto assignment = make_folds(X.rows(), folds, seed);
  std::vector<double> acc(assignment.size());
  const std::int64_t nf = static_cast<std::int64_t>(assignment.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::int64_t f = 0; f < nf; ++f) {
    const auto train = detail::train_indices(assignment, static_cast<std::size_t>(f));
    acc[static_cast<std::size_t>(f)] =
        detail::fold_accuracy(X, y, learner, hyper, train,
                              assignment[static_cast<std::size_t>(f)], tolerance);
  }
  double sum = 0;
  for (double a : acc) sum += a;
  return sum / static_cast<double>(assignment.size());
}

template <class Learner>
struct GridResult {
  typename Learner::Hyper best{};
  double best_score = 0;
  std::vector<double> scores;  // parallel to the grid argument
  typename Learner::Model model;
};

// Evaluates cross_validate for every grid value, picks the argmax (ties go
// to the smaller hyperparameter), refits on the full data. The (value, fold)
// pairs form one flat parallel loop.
template <class Learner>
GridResult<Learner> grid_search(const FeatureMatrix& X, std::span<const int> y,
                                const Learner& learner,
                                std::span<const typename Learner::Hyper> grid, std::size_t folds,
                                std::uint64_t seed, int tolerance = kDefaultTolerance,
                                Exec exec = Exec::parallel) {
  if (grid.empty()) throw config_error("grid search: empty grid");
  if (y.size() != X.rows()) throw contract_error("cv: label/row mismatch");
  const auto assignment = make_folds(X.rows(), folds, seed);
  const std::size_t nf = assignment.size();

  std::vector<double> fold_acc(grid.size() * nf);
  const std::int64_t total = static_cast<std::int64_t>(fold_acc.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const std::size_t gi = static_cast<std::size_t>(idx) / nf;
    const std::size_t f = static_cast<std::size_t>(idx) % nf;
    const auto train = detail::train_indices(assignment, f);
    fold_acc[static_cast<std::size_t>(idx)] =
        detail::fold_accuracy(X, y, learner, grid[gi], train, assignment[f], tolerance);
  }

  GridResult<Learner> result;
  result.scores.resize(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double sum = 0;
    for (std::size_t f = 0; f < nf; ++f) sum += fold_acc[gi * nf + f];
    result.scores[gi] = sum / static_cast<double>(nf);
  }

  // Argmax, visiting candidates in ascending hyperparameter order so ties
  // resolve to the smaller value regardless of grid order.
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
  std::size_t best_gi = order[0];
  for (std::size_t i = 1; i < order.size(); ++i)
    if (result.scores[order[i]] > result.scores[best_gi]) best_gi = order[i];

  result.best = grid[best_gi];
  result.best_score = result.scores[best_gi];
  result.model = learner.fit(X, y, result.best);
  return result;
}

}  // namespace relsifter

#endif
