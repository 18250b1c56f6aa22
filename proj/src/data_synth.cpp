#include "focusfl/data_synth.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "focusfl/errors.hpp"
#include "focusfl/io.hpp"
#include "focusfl/parallel.hpp"

namespace focusfl {

namespace {

constexpr int kMaxPlacementAttempts = 10000;

Vector unit_direction(int dim, RandomStream& rng) {
  Vector v(static_cast<std::size_t>(dim));
  double n = 0.0;
  // A zero Gaussian draw has probability zero, but loop rather than divide by it.
  while (n == 0.0) {
    for (double& x : v) x = rng.normal();
    n = norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double ClusterSpec::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) best = std::min(best, distance(centers[i], centers[j]));
  }
  return best;
}

ClusterSpec gen_cluster_centers(int num_clusters, int dim, double inter_distance, RandomStream& rng,
                                double intra_radius) {
  if (num_clusters < 1 || dim < 1 || !(inter_distance > 0.0)) {
    throw std::invalid_argument("gen_cluster_centers: need M >= 1, d >= 1, R > 0");
  }
  ClusterSpec spec;
  spec.intra_radius = intra_radius;
  spec.inter_distance = inter_distance;
  int rejected = 0;
  while (spec.num_clusters() < num_clusters) {
    Vector candidate = scaled(unit_direction(dim, rng), inter_distance);
    bool far_enough = true;
    for (const auto& c : spec.centers) {
      if (distance(c, candidate) < inter_distance) {
        far_enough = false;
        break;
      }
    }
    if (far_enough) {
      spec.centers.push_back(std::move(candidate));
    } else if (++rejected >= kMaxPlacementAttempts) {
      throw std::runtime_error("center placement failed");
    }
  }
  return spec;
}

Vector sample_in_ball(int dim, double radius, RandomStream& rng) {
  if (radius == 0.0) return Vector(static_cast<std::size_t>(dim), 0.0);
  Vector dir = unit_direction(dim, rng);
  const double scale = radius * std::pow(rng.uniform(), 1.0 / dim);
  for (double& x : dir) x *= scale;
  return dir;
}

std::vector<Vector> gen_agent_means(const ClusterSpec& spec, std::span<const int> assignment, std::uint64_t seed) {
  std::vector<Vector> means(assignment.size());
  for (std::size_t e = 0; e < assignment.size(); ++e) {
    const int m = assignment[e];
    if (m < 0 || m >= spec.num_clusters()) throw std::invalid_argument("gen_agent_means: cluster index out of range");
    RandomStream rng(seed, StreamTag::agent_means, e);
    const auto& center = spec.centers[static_cast<std::size_t>(m)];
    Vector offset = sample_in_ball(static_cast<int>(center.size()), spec.intra_radius, rng);
    axpy(1.0, center, offset);
    means[e] = std::move(offset);
  }
  return means;
}

AgentDataset gen_regression_dataset(std::span<const double> mean, int n, double feature_std, double noise_std,
                                    RandomStream& rng) {
  if (n < 1 || !(feature_std > 0.0) || noise_std < 0.0) {
    throw std::invalid_argument("gen_regression_dataset: need n >= 1, delta > 0, sigma >= 0");
  }
  const std::size_t d = mean.size();
  AgentDataset data;
  data.features = Matrix(static_cast<std::size_t>(n), d);
  data.labels.resize(static_cast<std::size_t>(n));
  data.true_mean.assign(mean.begin(), mean.end());
  data.noise_std = noise_std;
  data.feature_std = feature_std;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.features.row(i);
    for (double& v : x) v = feature_std * rng.normal();
    data.labels[i] = dot(mean, x) + noise_std * rng.normal();
  }
  return data;
}

AgentDataset gen_classification_dataset(std::span<const double> mean, int n, double feature_std,
                                        RandomStream& rng) {
  if (n < 1 || !(feature_std > 0.0)) throw std::invalid_argument("gen_classification_dataset: need n >= 1, delta > 0");
  const std::size_t d = mean.size();
  AgentDataset data;
  data.features = Matrix(static_cast<std::size_t>(n), d);
  data.labels.resize(static_cast<std::size_t>(n));
  data.true_mean.assign(mean.begin(), mean.end());
  data.feature_std = feature_std;
  data.classification = true;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.features.row(i);
    for (double& v : x) v = feature_std * rng.normal();
    data.labels[i] = rng.uniform() < sigmoid(dot(mean, x)) ? 1.0 : 0.0;
  }
  return data;
}

std::vector<int> scenario_assignment(const ScenarioConfig& cfg) {
  const auto E = static_cast<std::size_t>(cfg.num_agents);
  if (cfg.scenario_kind == ScenarioKind::single_outlier) {
    std::vector<int> a(E, 0);
    a.back() = 1;
    return a;
  }
  // Largest group first, then groups of size M-1, M-2, ..., 1 (7/2/1 for E=10, M=3).
  const int M = cfg.num_clusters;
  std::vector<int> sizes(static_cast<std::size_t>(M), 0);
  int minority = 0;
  for (int m = 1; m < M; ++m) {
    sizes[static_cast<std::size_t>(m)] = std::max(1, M - m);
    minority += sizes[static_cast<std::size_t>(m)];
  }
  sizes[0] = cfg.num_agents - minority;
  if (sizes[0] < 1) throw ConfigError("num_agents: too few agents for multi_cluster layout");
  std::vector<int> a;
  a.reserve(E);
  for (int m = 0; m < M; ++m) a.insert(a.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(m)]), m);
  return a;
}

void center_cluster_means(std::vector<Vector>& means, std::span<const int> assignment, const ClusterSpec& spec) {
  if (means.size() != assignment.size()) throw std::invalid_argument("center_cluster_means: one mean per agent");
  for (int m = 0; m < spec.num_clusters(); ++m) {
    std::vector<std::size_t> members;
    for (std::size_t e = 0; e < assignment.size(); ++e) {
      if (assignment[e] == m) members.push_back(e);
    }
    if (members.empty()) continue;
    const auto& center = spec.centers[static_cast<std::size_t>(m)];
    Vector shift(center.size(), 0.0);
    for (std::size_t e : members) axpy(1.0 / static_cast<double>(members.size()), subtract(means[e], center), shift);
    double widest = 0.0;
    for (std::size_t e : members) {
      axpy(-1.0, shift, means[e]);
      widest = std::max(widest, distance(means[e], center));
    }
    if (widest <= spec.intra_radius) continue;
    const double shrink = spec.intra_radius / widest * (1.0 - 1e-12);  // stay inside after rounding
    for (std::size_t e : members) {
      Vector offset = subtract(means[e], center);
      means[e] = center;
      axpy(shrink, offset, means[e]);
    }
  }
}

ScenarioLayout scenario_layout(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioLayout layout;
  layout.assignment = scenario_assignment(cfg);
  RandomStream center_rng(cfg.seed, StreamTag::cluster_centers);
  if (cfg.scenario_kind == ScenarioKind::single_outlier) {
    layout.clusters = gen_cluster_centers(1, cfg.dimension, cfg.inter_distance, center_rng, cfg.intra_radius);
    RandomStream dir_rng(cfg.seed, StreamTag::outlier_direction);
    Vector outlier = unit_direction(cfg.dimension, dir_rng);
    for (double& v : outlier) v *= cfg.inter_distance + cfg.intra_radius;
    axpy(1.0, layout.clusters.centers[0], outlier);
    layout.clusters.centers.push_back(std::move(outlier));

    const std::span<const int> normal(layout.assignment.data(), layout.assignment.size() - 1);
    layout.means = gen_agent_means(layout.clusters, normal, cfg.seed);
    center_cluster_means(layout.means, normal, layout.clusters);
    layout.means.push_back(layout.clusters.centers[1]);
  } else {
    layout.clusters =
        gen_cluster_centers(cfg.num_clusters, cfg.dimension, cfg.inter_distance, center_rng, cfg.intra_radius);
    layout.means = gen_agent_means(layout.clusters, layout.assignment, cfg.seed);
    center_cluster_means(layout.means, layout.assignment, layout.clusters);
  }
  return layout;
}

namespace {

std::vector<AgentDataset> sample_agents(const ScenarioConfig& cfg, const ScenarioLayout& layout, StreamTag tag) {
  std::vector<AgentDataset> out(layout.means.size());
  parallel_for(out.size(), [&](std::size_t e) {
    RandomStream rng(cfg.seed, tag, e);
    out[e] = cfg.model_kind == ModelFamily::linear_regression
                 ? gen_regression_dataset(layout.means[e], cfg.samples_per_agent, cfg.feature_std, cfg.noise_std, rng)
                 : gen_classification_dataset(layout.means[e], cfg.samples_per_agent, cfg.feature_std, rng);
    out[e].true_cluster = layout.assignment[e];
  });
  return out;
}

}  // namespace

std::vector<AgentDataset> gen_outlier_scenario(const ScenarioConfig& cfg) {
  if (cfg.scenario_kind != ScenarioKind::single_outlier) {
    throw std::invalid_argument("gen_outlier_scenario: scenario_kind must be single_outlier");
  }
  if (cfg.num_agents < 3) throw ConfigError("num_agents: E > 2 required");
  return sample_agents(cfg, scenario_layout(cfg), StreamTag::train_data);
}

Scenario generate_scenario(const ScenarioConfig& cfg, int eval_samples_per_agent) {
  if (eval_samples_per_agent < 0) throw ConfigError("eval_samples_per_agent: must be >= 0");
  ScenarioLayout layout = scenario_layout(cfg);
  Scenario s;
  s.train = sample_agents(cfg, layout, StreamTag::train_data);
  s.test = sample_agents(cfg, layout, StreamTag::test_data);
  if (eval_samples_per_agent > 0) {
    ScenarioConfig eval_cfg = cfg;
    eval_cfg.samples_per_agent = eval_samples_per_agent;
    s.eval = sample_agents(eval_cfg, layout, StreamTag::eval_data);
  }
  s.clusters = std::move(layout.clusters);
  s.assignment = std::move(layout.assignment);
  return s;
}

AgentDataset resample(const AgentDataset& like, int n, RandomStream& rng) {
  AgentDataset out = like.classification
                         ? gen_classification_dataset(like.true_mean, n, like.feature_std, rng)
                         : gen_regression_dataset(like.true_mean, n, like.feature_std, like.noise_std, rng);
  out.true_cluster = like.true_cluster;
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const AgentDataset& data) {
  std::string text = "# schema=1\n";
  for (std::size_t j = 0; j < data.dim(); ++j) text += "x" + std::to_string(j) + ",";
  text += "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features.row(i)) {
      text += format_double(v);
      text += ',';
    }
    text += format_double(data.labels[i]);
    text += '\n';
  }
  write_file_atomic(path, text);
}

}  // namespace focusfl
