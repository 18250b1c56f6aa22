#include "focusfl/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "focusfl/parallel.hpp"

namespace focusfl {

std::string_view to_string(ExcessMethod m) {
  return m == ExcessMethod::analytic_linear ? "analytic_linear" : "surrogate";
}

Vector ExcessRiskVector::clamped() const {
  Vector out = per_agent;
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

FaaResult faa(std::span<const double> excess) {
  if (excess.empty()) throw std::invalid_argument("faa: need at least one agent");
  std::size_t hi = 0;
  std::size_t lo = 0;
  for (std::size_t e = 1; e < excess.size(); ++e) {
    if (excess[e] > excess[hi]) hi = e;
    if (excess[e] < excess[lo]) lo = e;
  }
  return {excess[hi] - excess[lo], {static_cast<int>(hi), static_cast<int>(lo)}};
}

double agnostic_loss(std::span<const double> per_agent_loss) {
  if (per_agent_loss.empty()) throw std::invalid_argument("agnostic_loss: need at least one agent");
  return *std::max_element(per_agent_loss.begin(), per_agent_loss.end());
}

double accuracy_parity_std(std::span<const double> per_agent_accuracy) {
  if (per_agent_accuracy.empty()) throw std::invalid_argument("accuracy_parity_std: need at least one agent");
  // Deviations from the first entry, so identical accuracies give exactly 0.
  const double n = static_cast<double>(per_agent_accuracy.size());
  const double pivot = per_agent_accuracy.front();
  double mean = 0.0;
  for (double a : per_agent_accuracy) mean += a - pivot;
  mean /= n;
  double var = 0.0;
  for (double a : per_agent_accuracy) var += (a - pivot - mean) * (a - pivot - mean);
  return std::sqrt(var / n);
}

Theorem3Bounds theorem3_bounds(int num_agents, double intra_radius, double inter_distance, double feature_std) {
  if (num_agents <= 2) throw std::invalid_argument("theorem3_bounds: the outlier setting needs E > 2");
  if (!(inter_distance > 2.0 * intra_radius) || intra_radius < 0.0) {
    throw std::invalid_argument("theorem3_bounds: need R > 2r >= 0");
  }
  const double d2 = feature_std * feature_std;
  const double E = num_agents;
  const double r = intra_radius;
  const double R = inter_distance;
  return {d2 * r * r, d2 * ((R * R * (E - 2.0) - 2.0 * R * r) / E + r * r)};
}

ParamVector train_centralized(const ModelKind& model, std::span<const AgentDataset* const> members,
                              const SurrogateBudget& budget, bool* converged) {
  if (members.empty()) throw std::invalid_argument("train_centralized: no data");
  double total_n = 0.0;
  double step_bound = 0.0;
  for (const auto* a : members) {
    total_n += static_cast<double>(a->size());
    step_bound = std::max(step_bound, smoothness_bound(model, *a));
  }
  if (total_n == 0.0) throw std::invalid_argument("train_centralized: pooled data is empty");
  const double step = 1.0 / step_bound;

  auto pooled_gradient = [&](const ParamVector& w) {
    ParamVector g(w.size(), 0.0);
    for (const auto* a : members) axpy(static_cast<double>(a->size()) / total_n, gradient(model, w, *a), g);
    return g;
  };

  ParamVector w(members.front()->dim(), 0.0);
  ParamVector g = pooled_gradient(w);
  bool done = norm(g) <= budget.gradient_tolerance;
  for (int it = 0; it < budget.max_iterations && !done; ++it) {
    axpy(-step, g, w);
    g = pooled_gradient(w);
    done = norm(g) <= budget.gradient_tolerance;
  }
  if (converged != nullptr) *converged = done;
  return w;
}

SurrogateBayes surrogate_bayes_loss(const ModelKind& model, std::span<const AgentDataset> train,
                                    std::span<const AgentDataset> eval, const SurrogateBudget& budget) {
  if (train.size() != eval.size()) throw std::invalid_argument("surrogate_bayes_loss: train/eval agent counts differ");
  std::map<int, std::vector<const AgentDataset*>> groups;
  for (const auto& a : train) groups[a.true_cluster].push_back(&a);

  SurrogateBayes out;
  std::vector<int> cluster_ids;
  for (const auto& [c, _] : groups) cluster_ids.push_back(c);
  std::vector<ParamVector> fitted(cluster_ids.size());
  std::vector<char> ok(cluster_ids.size(), 1);
  parallel_for(cluster_ids.size(), [&](std::size_t i) {
    bool conv = false;
    fitted[i] = train_centralized(model, groups.at(cluster_ids[i]), budget, &conv);
    ok[i] = conv ? 1 : 0;
  });

  const int max_id = cluster_ids.empty() ? -1 : cluster_ids.back();
  out.cluster_models.assign(static_cast<std::size_t>(max_id + 1), ParamVector{});
  for (std::size_t i = 0; i < cluster_ids.size(); ++i) {
    out.cluster_models[static_cast<std::size_t>(cluster_ids[i])] = fitted[i];
    out.converged = out.converged && ok[i] != 0;
  }
  out.per_agent_loss.resize(eval.size());
  for (std::size_t e = 0; e < eval.size(); ++e) {
    const auto& w = out.cluster_models[static_cast<std::size_t>(train[e].true_cluster)];
    out.per_agent_loss[e] = mean_sample_loss(model, w, eval[e]);
  }
  return out;
}

namespace {

ParamVector effective_linear_weight(const AgentPredictor& p) {
  ParamVector w(p.models.dim(), 0.0);
  for (std::size_t m = 0; m < p.weights.size(); ++m) axpy(p.weights[m], p.models.weights[m], w);
  return w;
}

}  // namespace

ExcessRiskVector excess_risks_analytic(const ModelKind& model, std::span<const AgentPredictor> predictors,
                                       std::span<const AgentDataset> datasets) {
  if (model.family != ModelFamily::linear_regression) {
    throw std::invalid_argument("analytic_linear excess risk requires a linear_regression model");
  }
  if (predictors.size() != datasets.size()) throw std::invalid_argument("excess_risks: one predictor per agent");
  ExcessRiskVector out{Vector(datasets.size()), ExcessMethod::analytic_linear};
  for (std::size_t e = 0; e < datasets.size(); ++e) {
    out.per_agent[e] =
        analytic_excess_risk_linear(effective_linear_weight(predictors[e]), datasets[e].true_mean, datasets[e].feature_std);
  }
  return out;
}

ExcessRiskVector excess_risks_surrogate(const ModelKind& model, std::span<const AgentPredictor> predictors,
                                        std::span<const AgentDataset> eval, const SurrogateBayes& bayes) {
  if (predictors.size() != eval.size() || bayes.per_agent_loss.size() != eval.size()) {
    throw std::invalid_argument("excess_risks: one predictor and one Bayes estimate per agent");
  }
  ExcessRiskVector out{Vector(eval.size()), ExcessMethod::surrogate};
  parallel_for(eval.size(), [&](std::size_t e) {
    out.per_agent[e] = ensemble_mean_loss(model, predictors[e].models, predictors[e].weights, eval[e]) -
                       bayes.per_agent_loss[e];
  });
  return out;
}

FairnessReport evaluate_fairness(const ModelKind& model, std::span<const AgentPredictor> predictors,
                                 std::span<const AgentDataset> train, std::span<const AgentDataset> eval,
                                 ExcessMethod method, const SurrogateBudget& budget) {
  if (predictors.size() != eval.size()) throw std::invalid_argument("evaluate_fairness: one predictor per agent");
  FairnessReport r;
  const std::size_t E = eval.size();
  if (method == ExcessMethod::analytic_linear) {
    r.per_agent_excess = excess_risks_analytic(model, predictors, eval);
    r.per_agent_loss.resize(E);
    for (std::size_t e = 0; e < E; ++e) {
      r.per_agent_loss[e] = eval[e].noise_std * eval[e].noise_std + r.per_agent_excess.per_agent[e];
    }
  } else {
    const SurrogateBayes bayes = surrogate_bayes_loss(model, train, eval, budget);
    r.surrogate_converged = bayes.converged;
    r.per_agent_loss.resize(E);
    parallel_for(E, [&](std::size_t e) {
      r.per_agent_loss[e] = ensemble_mean_loss(model, predictors[e].models, predictors[e].weights, eval[e]);
    });
    r.per_agent_excess.method = ExcessMethod::surrogate;
    r.per_agent_excess.per_agent.resize(E);
    for (std::size_t e = 0; e < E; ++e) r.per_agent_excess.per_agent[e] = r.per_agent_loss[e] - bayes.per_agent_loss[e];
  }

  const FaaResult headline = faa(r.per_agent_excess.clamped());
  r.faa = headline.value;
  r.argmax_pair = headline.argmax_pair;
  r.faa_raw = faa(r.per_agent_excess.per_agent).value;
  r.agnostic_loss = agnostic_loss(r.per_agent_loss);
  double total = 0.0;
  for (double v : r.per_agent_loss) total += v;
  r.avg_loss = total / static_cast<double>(E);

  if (model.is_classifier()) {
    r.per_agent_accuracy.resize(E);
    parallel_for(E, [&](std::size_t e) {
      r.per_agent_accuracy[e] = ensemble_accuracy(model, predictors[e].models, predictors[e].weights, eval[e]);
    });
    r.accuracy_parity_std = accuracy_parity_std(r.per_agent_accuracy);
  }
  return r;
}

nlohmann::json to_json(const FairnessReport& report) {
  nlohmann::json j{
      {"faa", report.faa},
      {"faa_raw", report.faa_raw},
      {"avg_loss", report.avg_loss},
      {"agnostic_loss", report.agnostic_loss},
      {"accuracy_parity_std", report.accuracy_parity_std ? nlohmann::json(*report.accuracy_parity_std) : nlohmann::json()},
      {"argmax_pair", {report.argmax_pair.first, report.argmax_pair.second}},
      {"per_agent_loss", report.per_agent_loss},
      {"per_agent_excess", report.per_agent_excess.per_agent},
      {"per_agent_excess_clamped", report.per_agent_excess.clamped()},
      {"excess_method", std::string(to_string(report.per_agent_excess.method))},
  };
  if (!report.per_agent_accuracy.empty()) j["per_agent_accuracy"] = report.per_agent_accuracy;
  if (report.per_agent_excess.method == ExcessMethod::surrogate) {
    j["surrogate_converged"] = report.surrogate_converged;
    j["surrogate_note"] = "oracle evaluation only: uses ground-truth cluster labels";
  }
  return j;
}

}  // namespace focusfl
