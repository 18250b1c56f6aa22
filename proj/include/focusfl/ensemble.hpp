#pragma once

#include <span>
#include <vector>

#include "focusfl/data_synth.hpp"
#include "focusfl/models.hpp"

namespace focusfl {

/// The M cluster models W = {w_1, ..., w_M}; all share one dimension.
struct ClusterModels {
  std::vector<ParamVector> weights;

  int size() const { return static_cast<int>(weights.size()); }
  std::size_t dim() const { return weights.empty() ? 0 : weights.front().size(); }
  bool all_finite() const;
  Vector norms() const;
};

/// sum_m weights[m] * predict(w_m, x). For classifiers the convex combination
/// of probability vectors is again a probability vector.
Prediction ensemble_predict(const ModelKind& model, const ClusterModels& models, std::span<const double> weights,
                            std::span<const double> x);

/// Mean over `data` of the loss of the ensemble prediction (predict first,
/// then apply the loss). A single model with weight 1 gives that model's
/// plain mean loss.
double ensemble_mean_loss(const ModelKind& model, const ClusterModels& models, std::span<const double> weights,
                          const AgentDataset& data);

/// Fraction of samples whose most probable ensemble class is correct.
double ensemble_accuracy(const ModelKind& model, const ClusterModels& models, std::span<const double> weights,
                         const AgentDataset& data);

/// The effective predictor one agent uses: a set of models and mixing weights.
/// FedAvg agents hold the global model with weight 1; FOCUS agents hold all M
/// models weighted by their soft-label row.
struct AgentPredictor {
  ClusterModels models;
  Vector weights;
};

}  // namespace focusfl
