#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focusfl/config.hpp"
#include "focusfl/data_synth.hpp"
#include "focusfl/fairness.hpp"
#include "focusfl/fl_engine.hpp"
#include "focusfl/focus_em.hpp"
#include "json.hpp"

namespace focusfl {

enum class Algorithm { fedavg, focus, fedavg_hardcluster };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
/// "all" expands to every algorithm; otherwise a comma-separated list.
std::vector<Algorithm> parse_algorithm_list(std::string_view s);

/// A scenario plus how to run it. Read from one flat JSON object holding the
/// ScenarioConfig keys and the manifest keys below; unknown keys are errors.
struct ExperimentManifest {
  ScenarioConfig scenario;
  std::vector<Algorithm> algorithms{Algorithm::fedavg, Algorithm::focus, Algorithm::fedavg_hardcluster};
  int repetitions = 1;
  std::filesystem::path output_dir = "out";
  InitStrategy init_strategy = InitStrategy::local_fit;
  /// Model checkpoints are written every this many rounds.
  int checkpoint_every = 10;
  /// Size of the fresh per-agent sample that fairness reports are computed
  /// on; 0 reuses the test sets.
  int eval_samples_per_agent = 100000;

  void validate() const;
};

ExperimentManifest manifest_from_json(const nlohmann::json& j);
ExperimentManifest load_manifest(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentManifest& m);

/// Everything one (algorithm, seed) run produces.
struct AlgorithmRun {
  Algorithm algorithm = Algorithm::focus;
  std::uint64_t seed = 0;
  ClusterModels models;
  /// FOCUS only: final soft labels and their per-round history.
  std::optional<SoftLabelMatrix> pi;
  std::vector<SoftLabelMatrix> pi_history;
  std::vector<int> assignment;
  std::vector<RoundLog> logs;
  /// Model snapshots keyed by round, every checkpoint_every rounds.
  std::vector<std::pair<int, ClusterModels>> checkpoints;
  std::vector<std::pair<int, int>> starved_events;
  FairnessReport report;
  /// Linear models only: exact excess risks of the trained predictors.
  std::optional<FairnessReport> analytic_report;
  double wall_seconds = 0.0;
};

/// Runs one algorithm on an already generated scenario. Reports are computed
/// on scenario.report_sets(). `cfg` supplies the
/// training hyperparameters and cluster count; the scenario's data is used
/// as given.
AlgorithmRun run_algorithm(const Scenario& scenario, const ScenarioConfig& cfg, Algorithm algorithm,
                           InitStrategy init, int checkpoint_every = 10);

struct SummaryRow {
  std::string algo;
  std::uint64_t seed = 0;
  double avg_loss = 0.0;
  double faa = 0.0;
  double agnostic = 0.0;
  std::optional<double> acc_parity;
};

SummaryRow summary_row(const AlgorithmRun& run);
std::string summary_csv_header();
std::string summary_csv_line(const SummaryRow& row);

/// Result JSON of one run: report, analytic block, starvation log. No timing.
nlohmann::json run_to_json(const AlgorithmRun& run);

struct ExperimentResult {
  nlohmann::json summary;
  std::vector<SummaryRow> rows;
  std::vector<AlgorithmRun> runs;
};

/// Every configured algorithm for seeds seed, seed+1, ..., seed+repetitions-1.
/// When `write_outputs` is set, writes the summary, round logs, pi logs,
/// checkpoints and a separate timing file under manifest.output_dir.
ExperimentResult run_experiment(const ExperimentManifest& manifest, bool write_outputs = true);

/// Per-agent training CSVs plus manifest.json under `out_dir`.
std::vector<std::filesystem::path> synthesize(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

struct TheoremCheckOptions {
  /// Absolute slack on trained FAA comparisons against the closed-form bounds.
  double faa_slack = 0.005;
  /// Required final pi to the true cluster.
  double min_correct_pi = 0.99;
  /// Allowed per-round decrease of min-correct-pi after round 1.
  double pi_trend_slack = 1e-6;
  /// Required shrink factor of ||w_m - w*_m|| from round 0 to round T.
  double distance_shrink = 10.0;
  /// Oracle init perturbation, as a multiple of inter_distance.
  double oracle_radius_factor = 0.2;
};

struct TheoremVerdict {
  bool pass = false;
  nlohmann::json details;
};

/// Convergence: oracle-perturbed init, then pi and model-distance checks.
TheoremVerdict check_theorem1(const ScenarioConfig& cfg, const TheoremCheckOptions& opts = {});

/// Fairness gap on the single-outlier linear scenario: closed-form FAA at the
/// analytic converged weights, then FAA of trained FOCUS and FedAvg models
/// (analytic excess risks) against theorem3_bounds with slack.
TheoremVerdict check_theorem3(const ScenarioConfig& cfg, const TheoremCheckOptions& opts = {});

/// Parameters a sweep may vary.
enum class SweepParam { num_clusters, local_steps, learning_rate, num_agents, intra_radius, inter_distance };

SweepParam parse_sweep_param(std::string_view s);
std::string_view to_string(SweepParam p);
std::vector<double> parse_sweep_values(std::string_view s);

struct SweepRow {
  std::string param;
  double value = 0.0;
  SummaryRow summary;
};

/// One summary row per (value, repetition, algorithm). Sweeping M changes
/// only the number of trained models: the data comes from the base scenario.
/// Every other parameter regenerates the scenario.
std::vector<SweepRow> run_sweep(const ExperimentManifest& manifest, SweepParam param, std::span<const double> values);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Closed-form weights the algorithms converge to on a single-outlier
/// scenario: the mean of all agent means (FedAvg) and the mean of each
/// ground-truth group (FOCUS with M = 2).
std::vector<AgentPredictor> analytic_fedavg_predictors(const std::vector<Vector>& means);
std::vector<AgentPredictor> analytic_cluster_predictors(const std::vector<Vector>& means, std::span<const int> assignment);

/// Command-line entry point. Returns the process exit code:
/// 0 success, 2 config error, 3 numeric divergence, 4 theorem-check failure.
int run_cli(int argc, char** argv);

}  // namespace focusfl
