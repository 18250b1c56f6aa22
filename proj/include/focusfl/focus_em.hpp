#pragma once

#include <span>
#include <utility>
#include <vector>

#include "focusfl/data_synth.hpp"
#include "focusfl/ensemble.hpp"
#include "focusfl/fl_engine.hpp"
#include "focusfl/linalg.hpp"

namespace focusfl {

/// E x M row-stochastic matrix of soft cluster labels pi_em.
class SoftLabelMatrix {
 public:
  SoftLabelMatrix() = default;
  /// Every entry 1/M.
  static SoftLabelMatrix uniform(int num_agents, int num_clusters);
  /// Validates that each row lies on the simplex within `tol`.
  static SoftLabelMatrix from_rows(const std::vector<Vector>& rows, double tol = 1e-9);

  int agents() const { return static_cast<int>(values_.rows); }
  int clusters() const { return static_cast<int>(values_.cols); }
  double operator()(int e, int m) const { return values_(static_cast<std::size_t>(e), static_cast<std::size_t>(m)); }
  std::span<const double> row(int e) const { return values_.row(static_cast<std::size_t>(e)); }
  /// Sum over agents of pi_em.
  double column_mass(int m) const;
  bool is_row_stochastic(double tol = 1e-9) const;

  friend bool operator==(const SoftLabelMatrix& a, const SoftLabelMatrix& b) { return a.values_.data == b.values_.data; }

 private:
  friend SoftLabelMatrix e_step(const SoftLabelMatrix& pi, const Matrix& losses);
  Matrix values_;
};

/// Soft-label update for one agent:
///   pi'_m = pi_m exp(-loss_m) / sum_m' pi_m' exp(-loss_m'),
/// evaluated in the log domain with a per-row max shift so it never
/// underflows to 0/0. Zero prior mass stays zero.
Vector e_step_row(std::span<const double> pi_row, std::span<const double> losses);

/// Applies e_step_row to every agent. `losses` is E x M.
SoftLabelMatrix e_step(const SoftLabelMatrix& pi, const Matrix& losses);

/// E x M matrix of mean training losses E_{D_e} l(x, y; w_m).
Matrix training_loss_matrix(const Federation& fed, const ClusterModels& models);

/// Below this column mass the pi-weighted aggregate is 0/0 and the cluster
/// keeps its previous model.
inline constexpr double kStarvedClusterMass = 1e-8;

struct MStepOutcome {
  ClusterModels models;
  /// Clusters whose mass fell below kStarvedClusterMass this step.
  std::vector<int> starved;
};

/// Every agent starts each cluster model from w_m, runs K local steps, and
/// the server sets w_m = sum_e pi_em theta_em / sum_e pi_em.
MStepOutcome m_step(const SoftLabelMatrix& pi, const ClusterModels& models, const Federation& fed);

/// Per-round monitoring for the convergence checks. Index 0 is the
/// initialization, so every vector has T + 1 entries.
struct FocusHistory {
  std::vector<SoftLabelMatrix> pi;
  std::vector<ClusterModels> models;
  /// min over agents of pi to the agent's true cluster, taking model m to
  /// stand for true cluster m (meaningful when models are aligned with the
  /// truth, as under oracle_perturbed init). Empty without ground truth.
  Vector min_correct_pi;
  /// ||w_m - w*_m|| per round, same alignment. Empty without ground truth.
  std::vector<Vector> center_distances;
  /// (round, cluster) pairs where the M-step found a starved cluster.
  std::vector<std::pair<int, int>> starved_events;
};

struct FocusResult {
  ClusterModels models;
  SoftLabelMatrix pi;
  FocusHistory history;
  std::vector<RoundLog> logs;
};

/// T rounds of (E-step with round-t models, then M-step) from pi = 1/M.
/// `truth`, when given, only feeds the monitoring fields of the history.
FocusResult run_focus(const Federation& fed, const ClusterModels& init, const ClusterSpec* truth = nullptr);

FocusResult run_focus(const Federation& fed, int num_clusters, const InitOptions& init,
                      const ClusterSpec* truth = nullptr);

/// Soft label for an agent that did not take part in training: one E-step
/// from the uniform prior using its mean losses under each model.
Vector one_shot_label(const ModelKind& model, const ClusterModels& models, const AgentDataset& data);

/// Row-wise argmax; ties go to the lowest cluster index.
std::vector<int> hard_assignment(const SoftLabelMatrix& pi);

/// Each agent's ensemble (all M models weighted by its pi row).
std::vector<AgentPredictor> focus_predictors(const ClusterModels& models, const SoftLabelMatrix& pi);

}  // namespace focusfl
