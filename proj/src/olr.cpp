#include "relsifter/olr.hpp"

#include <algorithm>
#include <cmath>

#include "relsifter/errors.hpp"

namespace relsifter {

double logistic_surrogate(double z) {
  if (z > 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

namespace {

// sigma(-z) = 1 / (1 + e^z), the derivative magnitude of the surrogate.
double sigmoid_neg(double z) {
  if (z > 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_dims(const OrdinalModel& model, const FeatureMatrix& X, std::span<const int> y) {
  if (model.weights.size() != X.cols()) throw contract_error("olr: weight/column mismatch");
  if (model.thresholds.size() != kNumThresholds) throw contract_error("olr: need 7 thresholds");
  if (y.size() != X.rows()) throw contract_error("olr: label/row mismatch");
  for (int label : y)
    if (label < 0 || label >= kNumScores) throw contract_error("olr: label outside 0..7");
}

// Shared data-term pass. Returns the mean loss term; when grads are given,
// accumulates the mean data gradients into them (callers add the
// regularizer).
double data_pass(const OrdinalModel& model, const FeatureMatrix& X, std::span<const int> y,
                 std::vector<double>* wgrad, std::vector<double>* tgrad) {
  const std::size_t n = X.rows();
  double loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const RowView row = X.row(i);
    const double margin = row.dot(model.weights);
    double coeff = 0;  // d loss_i / d margin
    for (int j = 0; j < kNumThresholds; ++j) {
      const double s = (j + 1 > y[i]) ? 1.0 : -1.0;
      const double z = s * (model.thresholds[j] - margin);
      loss += logistic_surrogate(z);
      if (wgrad) {
        const double sig = s * sigmoid_neg(z);
        coeff += sig;
        (*tgrad)[j] -= sig;
      }
    }
    if (wgrad)
      for (std::size_t e = 0; e < row.cols.size(); ++e)
        (*wgrad)[row.cols[e]] += coeff * row.vals[e];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (wgrad) {
    for (double& g : *wgrad) g *= inv_n;
    for (double& g : *tgrad) g *= inv_n;
  }
  return loss * inv_n;
}

double squared_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

double olr_loss(const OrdinalModel& model, const FeatureMatrix& X, std::span<const int> y) {
  check_dims(model, X, y);
  if (X.rows() == 0) throw contract_error("olr: empty training set");
  return data_pass(model, X, y, nullptr, nullptr) +
         model.alpha * squared_norm(model.weights);
}

OlrGradient olr_gradient(const OrdinalModel& model, const FeatureMatrix& X,
                         std::span<const int> y) {
  check_dims(model, X, y);
  if (X.rows() == 0) throw contract_error("olr: empty training set");
  OlrGradient g;
  g.weights.assign(X.cols(), 0.0);
  g.thresholds.assign(kNumThresholds, 0.0);
  data_pass(model, X, y, &g.weights, &g.thresholds);
  for (std::size_t c = 0; c < X.cols(); ++c) g.weights[c] += 2.0 * model.alpha * model.weights[c];
  return g;
}

namespace {

// Unconstrained parameter vector: [theta_1, delta_1..delta_6, w_0..w_{d-1}]
// with theta_j = theta_1 + sum_{i<j} exp(delta_i).
struct Reparam {
  std::size_t d;

  std::size_t size() const { return 1 + (kNumThresholds - 1) + d; }

  void to_model(std::span<const double> phi, OrdinalModel& m) const {
    m.thresholds.resize(kNumThresholds);
    m.thresholds[0] = phi[0];
    for (int j = 1; j < kNumThresholds; ++j)
      m.thresholds[j] = m.thresholds[j - 1] + std::exp(phi[j]);
    m.weights.assign(phi.begin() + kNumThresholds, phi.end());
  }

  // Chain rule from (weight, threshold) gradients to phi space.
  void pull_back(std::span<const double> phi, const OlrGradient& g,
                 std::vector<double>& out) const {
    out.assign(size(), 0.0);
    double suffix = 0;  // sum of g.thresholds[j] for j >= current
    for (int j = kNumThresholds - 1; j >= 1; --j) {
      suffix += g.thresholds[j];
      out[j] = std::exp(phi[j]) * suffix;
    }
    out[0] = suffix + g.thresholds[0];
    std::copy(g.weights.begin(), g.weights.end(), out.begin() + kNumThresholds);
  }
};

}  // namespace

OrdinalModel fit_olr(const FeatureMatrix& X, std::span<const int> y, double alpha,
                     const OlrConfig& config) {
  if (X.rows() == 0) throw contract_error("olr: empty training set");
  const Reparam rp{X.cols()};

  // w = 0, thresholds -3..3 (unit gaps: delta = 0).
  std::vector<double> phi(rp.size(), 0.0);
  phi[0] = -3.0;

  OrdinalModel model;
  model.alpha = alpha;
  rp.to_model(phi, model);
  double loss = olr_loss(model, X, y);

  std::vector<double> grad, trial_phi(rp.size());
  OrdinalModel trial = model;
  double step = config.step0;
  constexpr double kArmijo = 1e-4;

  model.converged = false;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    rp.pull_back(phi, olr_gradient(model, X, y), grad);
    const double gnorm2 = squared_norm(grad);
    if (std::sqrt(gnorm2) <= config.tolerance) {
      model.converged = true;
      break;
    }

    double t = std::min(config.step0, 2.0 * step);
    double trial_loss = 0;
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      for (std::size_t p = 0; p < phi.size(); ++p) trial_phi[p] = phi[p] - t * grad[p];
      rp.to_model(trial_phi, trial);
      trial_loss = olr_loss(trial, X, y);
      if (trial_loss <= loss - kArmijo * t * gnorm2) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // step underflowed: at numerical precision limit

    phi.swap(trial_phi);
    std::swap(model.thresholds, trial.thresholds);
    std::swap(model.weights, trial.weights);
    loss = trial_loss;
    step = t;
  }
  model.iterations = iter;
  return model;
}

int predict_olr(const OrdinalModel& model, RowView x) {
  const double margin = x.dot(model.weights);
  int score = 0;
  for (double theta : model.thresholds)
    if (margin > theta) ++score;
  return score;
}

}  // namespace relsifter
