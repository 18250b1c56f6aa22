#include "focusfl/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "focusfl/errors.hpp"

namespace focusfl {

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::linear_regression: return "linear_regression";
    case ModelFamily::ridge_logistic: return "ridge_logistic";
  }
  return "unknown";
}

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::single_outlier: return "single_outlier";
    case ScenarioKind::multi_cluster: return "multi_cluster";
  }
  return "unknown";
}

ModelFamily parse_model_family(std::string_view s) {
  if (s == "linear_regression") return ModelFamily::linear_regression;
  if (s == "ridge_logistic") return ModelFamily::ridge_logistic;
  throw ConfigError("model_kind: expected linear_regression or ridge_logistic, got '" + std::string(s) + "'");
}

ScenarioKind parse_scenario_kind(std::string_view s) {
  if (s == "single_outlier") return ScenarioKind::single_outlier;
  if (s == "multi_cluster") return ScenarioKind::multi_cluster;
  throw ConfigError("scenario_kind: expected single_outlier or multi_cluster, got '" + std::string(s) + "'");
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_same_v<T, double>) {
    require(it->is_number(), std::string(key) + ": expected a number");
    out = it->get<double>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    require(it->is_number_unsigned() || (it->is_number_integer() && it->get<std::int64_t>() >= 0),
            std::string(key) + ": expected a non-negative integer");
    out = it->get<std::uint64_t>();
  } else {
    require(it->is_number_integer(), std::string(key) + ": expected an integer");
    const auto v = it->get<std::int64_t>();
    require(v >= std::numeric_limits<int>::min() && v <= std::numeric_limits<int>::max(),
            std::string(key) + ": out of range");
    out = static_cast<int>(v);
  }
}

}  // namespace

const std::vector<std::string>& scenario_field_names() {
  static const std::vector<std::string> names = {
      "num_agents",   "num_clusters",      "dimension", "intra_radius", "inter_distance",
      "feature_std",  "noise_std",         "samples_per_agent", "rounds", "local_steps",
      "learning_rate", "seed",             "model_kind", "scenario_kind"};
  return names;
}

void ScenarioConfig::validate() const {
  require(num_agents >= 2, "num_agents: must be >= 2");
  require(num_clusters >= 1, "num_clusters: must be >= 1");
  require(dimension >= 1, "dimension: must be >= 1");
  require(std::isfinite(intra_radius) && intra_radius >= 0.0, "intra_radius: must be finite and >= 0");
  require(std::isfinite(inter_distance) && inter_distance > 0.0, "inter_distance: must be finite and > 0");
  require(intra_radius < inter_distance / 2.0, "intra_radius: must be < inter_distance / 2");
  require(std::isfinite(feature_std) && feature_std > 0.0, "feature_std: must be finite and > 0");
  require(std::isfinite(noise_std) && noise_std >= 0.0, "noise_std: must be finite and >= 0");
  require(samples_per_agent >= 1, "samples_per_agent: must be >= 1");
  require(rounds >= 1, "rounds: must be >= 1");
  require(local_steps >= 1, "local_steps: must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate: must be finite and > 0");
  if (scenario_kind == ScenarioKind::single_outlier) {
    require(num_agents > 2, "num_agents: E > 2 required for single_outlier");
  } else {
    // Group sizes follow the 7/2/1 pattern: group m >= 1 holds max(1, M - m) agents.
    int minority = 0;
    for (int m = 1; m < num_clusters; ++m) minority += std::max(1, num_clusters - m);
    require(num_agents > minority,
            "num_agents: multi_cluster with num_clusters=" + std::to_string(num_clusters) + " needs at least " +
                std::to_string(minority + 1) + " agents");
  }
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  return nlohmann::json{
      {"num_agents", cfg.num_agents},
      {"num_clusters", cfg.num_clusters},
      {"dimension", cfg.dimension},
      {"intra_radius", cfg.intra_radius},
      {"inter_distance", cfg.inter_distance},
      {"feature_std", cfg.feature_std},
      {"noise_std", cfg.noise_std},
      {"samples_per_agent", cfg.samples_per_agent},
      {"rounds", cfg.rounds},
      {"local_steps", cfg.local_steps},
      {"learning_rate", cfg.learning_rate},
      {"seed", cfg.seed},
      {"model_kind", std::string(to_string(cfg.model_kind))},
      {"scenario_kind", std::string(to_string(cfg.scenario_kind))},
  };
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  require(j.is_object(), "config: expected a JSON object");
  ScenarioConfig cfg;
  read_field(j, "num_agents", cfg.num_agents);
  read_field(j, "num_clusters", cfg.num_clusters);
  read_field(j, "dimension", cfg.dimension);
  read_field(j, "intra_radius", cfg.intra_radius);
  read_field(j, "inter_distance", cfg.inter_distance);
  read_field(j, "feature_std", cfg.feature_std);
  read_field(j, "noise_std", cfg.noise_std);
  read_field(j, "samples_per_agent", cfg.samples_per_agent);
  read_field(j, "rounds", cfg.rounds);
  read_field(j, "local_steps", cfg.local_steps);
  read_field(j, "learning_rate", cfg.learning_rate);
  read_field(j, "seed", cfg.seed);
  if (auto it = j.find("model_kind"); it != j.end()) {
    require(it->is_string(), "model_kind: expected a string");
    cfg.model_kind = parse_model_family(it->get<std::string>());
  }
  if (auto it = j.find("scenario_kind"); it != j.end()) {
    require(it->is_string(), "scenario_kind: expected a string");
    cfg.scenario_kind = parse_scenario_kind(it->get<std::string>());
  }
  cfg.validate();
  return cfg;
}

}  // namespace focusfl
