#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "focusfl/data_synth.hpp"
#include "focusfl/ensemble.hpp"
#include "focusfl/models.hpp"
#include "json.hpp"

namespace focusfl {

enum class ExcessMethod { analytic_linear, surrogate };

std::string_view to_string(ExcessMethod m);

/// Per-agent excess risk. Surrogate estimates can dip slightly below zero
/// from sampling noise; `per_agent` keeps the raw values.
struct ExcessRiskVector {
  Vector per_agent;
  ExcessMethod method = ExcessMethod::analytic_linear;

  /// Raw values with negatives raised to 0.
  Vector clamped() const;
};

struct FaaResult {
  double value = 0.0;
  /// (agent with the largest excess, agent with the smallest excess).
  std::pair<int, int> argmax_pair{0, 0};
};

/// max_e excess_e - min_e excess_e, with the attaining pair. O(E).
FaaResult faa(std::span<const double> excess);

/// Worst per-agent (test) loss.
double agnostic_loss(std::span<const double> per_agent_loss);

/// Population standard deviation of per-agent accuracies.
double accuracy_parity_std(std::span<const double> per_agent_accuracy);

struct Theorem3Bounds {
  double focus_upper = 0.0;
  double fedavg_lower = 0.0;
};

/// Closed-form fairness bounds for one outlier among E agents:
///   FAA_focus <= delta^2 r^2,
///   FAA_avg   >= delta^2 ((R^2 (E - 2) - 2 R r) / E + r^2).
/// Requires E > 2 and R > 2r.
Theorem3Bounds theorem3_bounds(int num_agents, double intra_radius, double inter_distance, double feature_std);

struct SurrogateBudget {
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
};

/// Stand-in for each agent's Bayes-optimal loss: one model per ground-truth
/// cluster, trained centrally on that cluster's pooled training data, then
/// evaluated on each member's evaluation data.
///
/// Oracle evaluation only: reads `true_cluster`, which no training path may use.
struct SurrogateBayes {
  Vector per_agent_loss;
  std::vector<ParamVector> cluster_models;
  /// False for any cluster whose training ran out of budget before reaching
  /// the gradient tolerance; the best iterate is used regardless.
  bool converged = true;
};

SurrogateBayes surrogate_bayes_loss(const ModelKind& model, std::span<const AgentDataset> train,
                                    std::span<const AgentDataset> eval, const SurrogateBudget& budget = {});

/// Full-batch gradient descent on the pooled data of `members` with step
/// 1 / (smoothness bound), from zero, until the gradient norm drops below the
/// tolerance or the budget is spent.
ParamVector train_centralized(const ModelKind& model, std::span<const AgentDataset* const> members,
                              const SurrogateBudget& budget, bool* converged = nullptr);

/// analytic_linear: delta^2 ||w_eff - mu_e||^2, where w_eff = sum_m pi_m w_m is
/// the single linear model equivalent to the agent's ensemble. Linear only.
ExcessRiskVector excess_risks_analytic(const ModelKind& model, std::span<const AgentPredictor> predictors,
                                       std::span<const AgentDataset> datasets);

/// surrogate: ensemble loss on eval data minus the surrogate Bayes loss on
/// the same eval data.
ExcessRiskVector excess_risks_surrogate(const ModelKind& model, std::span<const AgentPredictor> predictors,
                                        std::span<const AgentDataset> eval, const SurrogateBayes& bayes);

struct FairnessReport {
  /// FAA of the clamped excess vector (the headline number).
  double faa = 0.0;
  /// FAA of the raw excess vector.
  double faa_raw = 0.0;
  double avg_loss = 0.0;
  double agnostic_loss = 0.0;
  std::optional<double> accuracy_parity_std;
  std::pair<int, int> argmax_pair{0, 0};
  Vector per_agent_loss;
  ExcessRiskVector per_agent_excess;
  Vector per_agent_accuracy;
  bool surrogate_converged = true;
};

/// Evaluates every agent's predictor.
///
/// With analytic_linear, per-agent losses are exact population losses
/// sigma_e^2 + delta^2 ||w_eff - mu_e||^2. With surrogate, losses are
/// empirical losses on `eval` (the agents' held-out test sets) and the Bayes
/// term comes from surrogate_bayes_loss trained on `train`.
FairnessReport evaluate_fairness(const ModelKind& model, std::span<const AgentPredictor> predictors,
                                 std::span<const AgentDataset> train, std::span<const AgentDataset> eval,
                                 ExcessMethod method, const SurrogateBudget& budget = {});

nlohmann::json to_json(const FairnessReport& report);

}  // namespace focusfl
