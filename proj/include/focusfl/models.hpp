#pragma once

#include <span>
#include <vector>

#include "focusfl/config.hpp"
#include "focusfl/data_synth.hpp"
#include "focusfl/linalg.hpp"

namespace focusfl {

using ParamVector = Vector;

/// Regression predictions have one entry (w^T x); logistic predictions are a
/// two-entry class-probability vector (P(y=0), P(y=1)).
using Prediction = std::vector<double>;

struct ModelKind {
  ModelFamily family = ModelFamily::linear_regression;
  /// Strong-convexity constant of the ridge-logistic objective; unused for
  /// linear regression.
  double ridge_lambda = 0.1;

  static ModelKind linear() { return {ModelFamily::linear_regression, 0.0}; }
  static ModelKind logistic(double lambda = 0.1) { return {ModelFamily::ridge_logistic, lambda}; }
  static ModelKind from(ModelFamily family) {
    return family == ModelFamily::linear_regression ? linear() : logistic();
  }

  bool is_classifier() const { return family == ModelFamily::ridge_logistic; }
  void validate() const;
};

/// Training objective: mean squared error for linear models; mean negative
/// log-likelihood plus (lambda/2)||w||^2 for ridge logistic.
double empirical_loss(const ModelKind& model, std::span<const double> w, const AgentDataset& data);

/// Mean per-sample loss without the ridge term. This is E_{D}[l(x, y; w)],
/// the quantity the soft-label update and the evaluation paths use.
double mean_sample_loss(const ModelKind& model, std::span<const double> w, const AgentDataset& data);

/// Exact gradient of empirical_loss.
ParamVector gradient(const ModelKind& model, std::span<const double> w, const AgentDataset& data);

/// Upper bound on the Lipschitz constant of the gradient of empirical_loss,
/// from a Gershgorin bound on the largest eigenvalue of X^T X / n.
double smoothness_bound(const ModelKind& model, const AgentDataset& data);

/// sigma^2 + delta^2 ||w - mu||^2: population MSE under the Gaussian linear
/// generating model.
double analytic_population_loss_linear(std::span<const double> w, std::span<const double> mu, double feature_std,
                                       double noise_std);

/// delta^2 ||w - mu||^2.
double analytic_excess_risk_linear(std::span<const double> w, std::span<const double> mu, double feature_std);

Prediction predict(const ModelKind& model, std::span<const double> w, std::span<const double> x);

/// Per-sample loss of an already-formed prediction: squared error, or
/// negative log-probability of the observed class.
double prediction_loss(const ModelKind& model, const Prediction& p, double y);

/// Classification only: whether the most probable class matches y.
bool prediction_correct(const Prediction& p, double y);

/// Numerically stable log(1 + exp(z)).
double softplus(double z);
double sigmoid(double z);

}  // namespace focusfl
