#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "focusfl/config.hpp"
#include "focusfl/linalg.hpp"
#include "focusfl/rng.hpp"

namespace focusfl {

/// Ground-truth cluster centers w*_m, pairwise at least `inter_distance`
/// apart, with agents of cluster m living within `intra_radius` of center m.
struct ClusterSpec {
  std::vector<Vector> centers;
  double intra_radius = 0.0;
  double inter_distance = 1.0;

  int num_clusters() const { return static_cast<int>(centers.size()); }
  double min_pairwise_distance() const;
};

/// One agent's local data. `true_mean`, `noise_std` and `true_cluster` are
/// generating metadata: only evaluation code may read them.
struct AgentDataset {
  Matrix features;
  Vector labels;
  Vector true_mean;
  double noise_std = 0.0;
  double feature_std = 1.0;
  int true_cluster = 0;
  bool classification = false;

  std::size_t size() const { return features.rows; }
  std::size_t dim() const { return features.cols; }
};

/// Centers drawn uniformly on the sphere of radius R around the origin, with
/// rejection until every pair is at least R apart. Gives up after 10^4
/// rejected candidates with "center placement failed".
ClusterSpec gen_cluster_centers(int num_clusters, int dim, double inter_distance, RandomStream& rng,
                                double intra_radius = 0.0);

/// Uniform draw from the closed ball of the given radius.
Vector sample_in_ball(int dim, double radius, RandomStream& rng);

/// mu_e = centers[assignment[e]] + u_e, u_e uniform in the r-ball. Agent e
/// draws from its own stream so results do not depend on call order.
std::vector<Vector> gen_agent_means(const ClusterSpec& spec, std::span<const int> assignment, std::uint64_t seed);

/// x ~ N(0, delta^2 I), y = mean^T x + eps with eps ~ N(0, sigma^2).
AgentDataset gen_regression_dataset(std::span<const double> mean, int n, double feature_std, double noise_std,
                                    RandomStream& rng);

/// x ~ N(0, delta^2 I), y ~ Bernoulli(sigmoid(mean^T x)), labels stored as 0/1.
AgentDataset gen_classification_dataset(std::span<const double> mean, int n, double feature_std,
                                        RandomStream& rng);

/// Ground-truth group of every agent for the configured scenario kind.
std::vector<int> scenario_assignment(const ScenarioConfig& cfg);

/// Shifts each cluster's means so they average exactly to the cluster
/// center, then shrinks them toward it if any left the r-ball. Afterwards the
/// center is the pooled optimum of its members (equal n and delta).
void center_cluster_means(std::vector<Vector>& means, std::span<const int> assignment, const ClusterSpec& spec);

/// Cluster layout and per-agent means for the scenario, before any samples.
struct ScenarioLayout {
  ClusterSpec clusters;
  std::vector<int> assignment;
  std::vector<Vector> means;
};

ScenarioLayout scenario_layout(const ScenarioConfig& cfg);

/// Training sets for the single-outlier scenario: agents 0..E-2 lie within r
/// of a shared center mu*, agent E-1 sits exactly R + r from mu* (hence at
/// least R from every other agent's mean and from their average).
std::vector<AgentDataset> gen_outlier_scenario(const ScenarioConfig& cfg);

struct Scenario {
  ClusterSpec clusters;
  std::vector<int> assignment;
  std::vector<AgentDataset> train;
  /// Fresh i.i.d. samples from the same generating parameters, drawn from a
  /// disjoint stream and of the same size as the training sets.
  std::vector<AgentDataset> test;
  /// Optional large held-out sample for fairness reports; empty unless requested.
  std::vector<AgentDataset> eval;

  /// The sets fairness reports are computed on: `eval` if present, else `test`.
  std::span<const AgentDataset> report_sets() const { return eval.empty() ? test : eval; }
};

Scenario generate_scenario(const ScenarioConfig& cfg, int eval_samples_per_agent = 0);

/// A new dataset from the same generating parameters as `like`.
AgentDataset resample(const AgentDataset& like, int n, RandomStream& rng);

/// Writes a `# schema=1` line, a header (x0..x{d-1},y) and one row per sample.
void write_dataset_csv(const std::filesystem::path& path, const AgentDataset& data);

}  // namespace focusfl
