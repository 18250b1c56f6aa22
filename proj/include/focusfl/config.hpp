#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace focusfl {

enum class ModelFamily { linear_regression, ridge_logistic };
enum class ScenarioKind { single_outlier, multi_cluster };

std::string_view to_string(ModelFamily f);
std::string_view to_string(ScenarioKind k);
ModelFamily parse_model_family(std::string_view s);
ScenarioKind parse_scenario_kind(std::string_view s);

/// Full description of one synthetic experiment. Defaults reproduce the
/// single-outlier setting: ten agents, r = 0.01, R = 1, unit feature scale.
///
/// `num_clusters` is the number of models the clustered algorithms train. For
/// multi_cluster data it is also the number of ground-truth groups; a single
/// outlier scenario always has exactly two groups regardless of it.
struct ScenarioConfig {
  int num_agents = 10;
  int num_clusters = 2;
  int dimension = 20;
  double intra_radius = 0.01;
  double inter_distance = 1.0;
  double feature_std = 1.0;
  double noise_std = 0.1;
  int samples_per_agent = 1000;
  int rounds = 100;
  int local_steps = 10;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  ModelFamily model_kind = ModelFamily::linear_regression;
  ScenarioKind scenario_kind = ScenarioKind::single_outlier;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

nlohmann::json to_json(const ScenarioConfig& cfg);

/// Reads the scenario fields present in `j`, leaving the rest at their
/// defaults. Unknown keys are not checked here (manifests add their own);
/// wrong types and invalid values raise ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Exactly the JSON keys that make up a serialized ScenarioConfig.
const std::vector<std::string>& scenario_field_names();

}  // namespace focusfl
