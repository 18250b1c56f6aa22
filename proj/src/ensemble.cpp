#include "focusfl/ensemble.hpp"

#include <stdexcept>

namespace focusfl {

bool ClusterModels::all_finite() const {
  for (const auto& w : weights) {
    if (!focusfl::all_finite(w)) return false;
  }
  return true;
}

Vector ClusterModels::norms() const {
  Vector out;
  out.reserve(weights.size());
  for (const auto& w : weights) out.push_back(norm(w));
  return out;
}

Prediction ensemble_predict(const ModelKind& model, const ClusterModels& models, std::span<const double> weights,
                            std::span<const double> x) {
  if (weights.size() != models.weights.size()) throw std::invalid_argument("ensemble: weight count != model count");
  Prediction out(model.is_classifier() ? 2 : 1, 0.0);
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] == 0.0) continue;
    const Prediction p = predict(model, models.weights[m], x);
    axpy(weights[m], p, out);
  }
  return out;
}

double ensemble_mean_loss(const ModelKind& model, const ClusterModels& models, std::span<const double> weights,
                          const AgentDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("ensemble_mean_loss: empty dataset");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += prediction_loss(model, ensemble_predict(model, models, weights, data.features.row(i)), data.labels[i]);
  }
  return total / static_cast<double>(data.size());
}

double ensemble_accuracy(const ModelKind& model, const ClusterModels& models, std::span<const double> weights,
                         const AgentDataset& data) {
  if (!model.is_classifier()) throw std::invalid_argument("accuracy requires a classification model");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (prediction_correct(ensemble_predict(model, models, weights, data.features.row(i)), data.labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace focusfl
