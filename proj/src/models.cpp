#include "focusfl/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace focusfl {

namespace {

void check_dims(std::span<const double> w, const AgentDataset& data) {
  if (w.size() != data.dim()) {
    throw std::invalid_argument("dimension mismatch: parameter has " + std::to_string(w.size()) +
                                " entries, data has " + std::to_string(data.dim()) + " features");
  }
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
}

}  // namespace

void ModelKind::validate() const {
  if (family == ModelFamily::ridge_logistic && !(ridge_lambda > 0.0)) {
    throw std::invalid_argument("ridge_logistic requires ridge_lambda > 0");
  }
}

double softplus(double z) {
  // log(1 + e^z) = max(z, 0) + log1p(e^-|z|); never overflows.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean_sample_loss(const ModelKind& model, std::span<const double> w, const AgentDataset& data) {
  check_dims(w, data);
  double total = 0.0;
  if (model.family == ModelFamily::linear_regression) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double r = dot(w, data.features.row(i)) - data.labels[i];
      total += r * r;
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double z = dot(w, data.features.row(i));
      total += softplus(z) - data.labels[i] * z;
    }
  }
  return total / static_cast<double>(data.size());
}

double empirical_loss(const ModelKind& model, std::span<const double> w, const AgentDataset& data) {
  double loss = mean_sample_loss(model, w, data);
  if (model.family == ModelFamily::ridge_logistic) loss += 0.5 * model.ridge_lambda * dot(w, w);
  return loss;
}

ParamVector gradient(const ModelKind& model, std::span<const double> w, const AgentDataset& data) {
  check_dims(w, data);
  ParamVector g(w.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  if (model.family == ModelFamily::linear_regression) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto x = data.features.row(i);
      axpy(2.0 * (dot(w, x) - data.labels[i]), x, g);
    }
    for (double& v : g) v *= inv_n;
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto x = data.features.row(i);
      axpy(sigmoid(dot(w, x)) - data.labels[i], x, g);
    }
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = g[j] * inv_n + model.ridge_lambda * w[j];
  }
  return g;
}

double smoothness_bound(const ModelKind& model, const AgentDataset& data) {
  const std::size_t d = data.dim();
  Matrix gram(d, d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.features.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) gram(a, b) += x[a] * x[b];
    }
  }
  double bound = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    double row_sum = 0.0;
    for (std::size_t b = 0; b < d; ++b) row_sum += std::abs(gram(a, b));
    bound = std::max(bound, row_sum);
  }
  bound /= static_cast<double>(data.size());
  return model.family == ModelFamily::linear_regression ? 2.0 * bound : 0.25 * bound + model.ridge_lambda;
}

double analytic_population_loss_linear(std::span<const double> w, std::span<const double> mu, double feature_std,
                                       double noise_std) {
  return noise_std * noise_std + analytic_excess_risk_linear(w, mu, feature_std);
}

double analytic_excess_risk_linear(std::span<const double> w, std::span<const double> mu, double feature_std) {
  if (w.size() != mu.size()) throw std::invalid_argument("dimension mismatch");
  return feature_std * feature_std * squared_distance(w, mu);
}

Prediction predict(const ModelKind& model, std::span<const double> w, std::span<const double> x) {
  if (w.size() != x.size()) throw std::invalid_argument("dimension mismatch");
  const double z = dot(w, x);
  if (model.family == ModelFamily::linear_regression) return {z};
  return {sigmoid(-z), sigmoid(z)};
}

double prediction_loss(const ModelKind& model, const Prediction& p, double y) {
  if (model.family == ModelFamily::linear_regression) {
    const double r = p[0] - y;
    return r * r;
  }
  const double prob = p[y > 0.5 ? 1 : 0];
  return -std::log(std::max(prob, std::numeric_limits<double>::min()));
}

bool prediction_correct(const Prediction& p, double y) {
  if (p.size() < 2) throw std::invalid_argument("accuracy is defined for classification predictions only");
  const int predicted = p[1] > p[0] ? 1 : 0;
  return predicted == (y > 0.5 ? 1 : 0);
}

}  // namespace focusfl
