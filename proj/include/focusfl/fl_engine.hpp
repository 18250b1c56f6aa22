#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "focusfl/config.hpp"
#include "focusfl/data_synth.hpp"
#include "focusfl/ensemble.hpp"
#include "focusfl/models.hpp"

namespace focusfl {

/// Static description of a federation: who holds which data and how local
/// training is run. All E agents take part in every round.
struct Federation {
  ModelKind model;
  std::span<const AgentDataset> train;
  std::span<const AgentDataset> test;
  double learning_rate = 0.05;
  int local_steps = 10;
  int rounds = 100;
  std::uint64_t seed = 1;

  static Federation from_config(const ScenarioConfig& cfg, std::span<const AgentDataset> train,
                                std::span<const AgentDataset> test);
  int num_agents() const { return static_cast<int>(train.size()); }
  /// Validates dataset sizes and dimensions against each other.
  void check() const;
};

struct FederationState {
  int round = 0;
  ClusterModels models;
};

/// Per-round losses, evaluated after the round's aggregation.
struct RoundLog {
  int round = 0;
  Vector per_agent_train_loss;
  Vector per_agent_test_loss;
  Vector model_snapshot_norms;
  std::chrono::duration<double> wall_time{0};
};

/// K full-batch gradient steps from w0. Throws DivergenceError if the
/// parameters become non-finite.
ParamVector local_sgd(std::span<const double> w0, const AgentDataset& data, double learning_rate, int local_steps,
                      const ModelKind& model);

/// sum_e (weights[e] / sum weights) * thetas[e], accumulated in index order.
/// Weights are normalized before the sum so that equivalent weightings (n_e/n
/// with equal n_e, or pi = 1) give bit-identical results.
ParamVector weighted_average(std::span<const ParamVector> thetas, std::span<const double> weights);

/// One FedAvg round: broadcast, local_sgd on every agent, then aggregation
/// weighted by n_e / n.
std::pair<FederationState, RoundLog> fedavg_round(const Federation& fed, const FederationState& state);

struct FedAvgResult {
  ParamVector model;
  std::vector<RoundLog> logs;
  /// Global model after each round; snapshots[0] is the initial model.
  std::vector<ParamVector> snapshots;
};

FedAvgResult run_fedavg(const Federation& fed, const ParamVector& init);

enum class InitStrategy { local_fit, oracle_perturbed };

std::string_view to_string(InitStrategy s);
InitStrategy parse_init_strategy(std::string_view s);

struct InitOptions {
  InitStrategy strategy = InitStrategy::local_fit;
  /// Ground-truth centers; required for oracle_perturbed.
  const ClusterSpec* truth = nullptr;
  /// Perturbation norm for oracle_perturbed, as a multiple of inter_distance.
  double oracle_radius_factor = 0.2;
  /// Distinguishes independent initializations that share a seed.
  std::uint64_t stream_index = 0;
};

/// Starting models for M clusters.
///
/// local_fit: each agent runs local_sgd from zero. From every start agent a
/// chain is built by repeatedly adding the fit farthest (in minimum distance)
/// from those already chosen, lowest index on ties. The chain minimizing
/// sum_e min_m loss_e(fit_m) wins, lowest start index on ties.
///
/// oracle_perturbed: w_m = w*_m + u_m with ||u_m|| = oracle_radius_factor * R
/// in a random direction.
ClusterModels initialize_models(const Federation& fed, int num_clusters, const InitOptions& opts);

/// FedAvg starting from the one-model local_fit initialization.
FedAvgResult run_fedavg(const Federation& fed);

struct HardClusterResult {
  ClusterModels models;
  std::vector<int> assignment;
  /// Logs aggregate all clusters: each agent's losses under its own cluster model.
  std::vector<RoundLog> logs;
};

/// Independent FedAvg per cluster over its member agents. Each cluster is
/// initialized like run_fedavg on its members, with the cluster index as the
/// init stream, so results do not depend on processing order.
HardClusterResult run_fedavg_hardcluster(const Federation& fed, std::span<const int> assignment, int num_clusters);

/// Global training objective sum_e (n_e / n) L_e(w).
double global_training_loss(const Federation& fed, std::span<const double> w);

}  // namespace focusfl
