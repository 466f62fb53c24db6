#ifndef RELSIFTER_OLR_HPP
#define RELSIFTER_OLR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "relsifter/features.hpp"

namespace relsifter {

constexpr int kNumThresholds = kNumScores - 1;  // 7 cut points for 8 labels

// Ordinal logistic regression with the all-thresholds loss.
struct OrdinalModel {
  std::vector<double> weights;     // one per feature column
  std::vector<double> thresholds;  // theta_1..theta_7, non-decreasing
  double alpha = 0;
  bool converged = true;
  int iterations = 0;
};

struct OlrConfig {
  double step0 = 1.0;      // initial line-search step
  int max_iterations = 5000;
  double tolerance = 1e-8;  // on gradient norm
};

struct OlrGradient {
  std::vector<double> weights;
  std::vector<double> thresholds;
};

// Numerically stable log(1 + e^{-z}).
double logistic_surrogate(double z);

// mean_i sum_{j=1..7} l(s_j(y_i) * (theta_j - w.x_i)) + alpha * ||w||^2,
// with s_j(y) = +1 if j > y else -1.
double olr_loss(const OrdinalModel& model, const FeatureMatrix& X, std::span<const int> y);

// Analytic gradient of olr_loss w.r.t. weights and thresholds.
OlrGradient olr_gradient(const OrdinalModel& model, const FeatureMatrix& X,
                         std::span<const int> y);

// Full-batch gradient descent with backtracking line search. Threshold
// monotonicity is enforced by the gap parameterization
// theta_j = theta_1 + sum_{i<j} exp(delta_i); the optimizer runs
// unconstrained over (theta_1, delta, w). Deterministic; converged is false
// when the gradient norm stays above tolerance for max_iterations.
OrdinalModel fit_olr(const FeatureMatrix& X, std::span<const int> y, double alpha,
                     const OlrConfig& config = {});

// |{ j : w.x > theta_j }|, an integer in 0..7.
int predict_olr(const OrdinalModel& model, RowView x);

}  // namespace relsifter

#endif
