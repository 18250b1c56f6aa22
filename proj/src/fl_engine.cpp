#include "focusfl/fl_engine.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "focusfl/errors.hpp"
#include "focusfl/parallel.hpp"
#include "focusfl/rng.hpp"

namespace focusfl {

Federation Federation::from_config(const ScenarioConfig& cfg, std::span<const AgentDataset> train,
                                   std::span<const AgentDataset> test) {
  Federation fed;
  fed.model = ModelKind::from(cfg.model_kind);
  fed.train = train;
  fed.test = test;
  fed.learning_rate = cfg.learning_rate;
  fed.local_steps = cfg.local_steps;
  fed.rounds = cfg.rounds;
  fed.seed = cfg.seed;
  return fed;
}

void Federation::check() const {
  if (train.empty()) throw std::invalid_argument("federation has no agents");
  if (!test.empty() && test.size() != train.size()) {
    throw std::invalid_argument("train and test agent counts differ");
  }
  const std::size_t d = train.front().dim();
  for (const auto& a : train) {
    if (a.dim() != d || a.size() == 0) throw std::invalid_argument("agent datasets must be non-empty with equal dimension");
  }
  for (const auto& a : test) {
    if (a.dim() != d || a.size() == 0) throw std::invalid_argument("agent test sets must be non-empty with equal dimension");
  }
  if (local_steps < 1) throw std::invalid_argument("local_steps must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  model.validate();
}

ParamVector local_sgd(std::span<const double> w0, const AgentDataset& data, double learning_rate, int local_steps,
                      const ModelKind& model) {
  if (local_steps < 1) throw std::invalid_argument("local_sgd: K must be >= 1");
  ParamVector w(w0.begin(), w0.end());
  for (int k = 0; k < local_steps; ++k) {
    const ParamVector g = gradient(model, w, data);
    axpy(-learning_rate, g, w);
    if (!all_finite(w)) {
      throw DivergenceError("divergence detected: non-finite parameters after local step " + std::to_string(k + 1) +
                            " (learning rate " + std::to_string(learning_rate) + " too large?)");
    }
  }
  return w;
}

ParamVector weighted_average(std::span<const ParamVector> thetas, std::span<const double> weights) {
  if (thetas.empty() || thetas.size() != weights.size()) {
    throw std::invalid_argument("weighted_average: need one weight per model");
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("weighted_average: total weight must be positive");
  ParamVector out(thetas.front().size(), 0.0);
  for (std::size_t e = 0; e < thetas.size(); ++e) {
    const double share = weights[e] / total;
    if (share == 0.0) continue;
    axpy(share, thetas[e], out);
  }
  return out;
}

namespace {

RoundLog evaluate_single(const Federation& fed, int round, const ParamVector& w) {
  RoundLog log;
  log.round = round;
  ClusterModels single{{w}};
  const Vector one{1.0};
  const auto E = fed.train.size();
  log.per_agent_train_loss.assign(E, 0.0);
  log.per_agent_test_loss.assign(E, 0.0);
  parallel_for(E, [&](std::size_t e) {
    log.per_agent_train_loss[e] = ensemble_mean_loss(fed.model, single, one, fed.train[e]);
    log.per_agent_test_loss[e] =
        fed.test.empty() ? log.per_agent_train_loss[e] : ensemble_mean_loss(fed.model, single, one, fed.test[e]);
  });
  log.model_snapshot_norms = {norm(w)};
  return log;
}

}  // namespace

std::pair<FederationState, RoundLog> fedavg_round(const Federation& fed, const FederationState& state) {
  if (state.models.size() != 1) throw std::invalid_argument("fedavg_round: state must hold exactly one global model");
  const auto start = std::chrono::steady_clock::now();
  const ParamVector& global = state.models.weights.front();
  const auto E = fed.train.size();

  std::vector<ParamVector> local(E);
  parallel_for(E, [&](std::size_t e) {
    local[e] = local_sgd(global, fed.train[e], fed.learning_rate, fed.local_steps, fed.model);
  });

  Vector sizes(E);
  for (std::size_t e = 0; e < E; ++e) sizes[e] = static_cast<double>(fed.train[e].size());

  FederationState next;
  next.round = state.round + 1;
  next.models.weights = {weighted_average(local, sizes)};
  if (!next.models.all_finite()) throw DivergenceError("divergence detected: non-finite global model", next.round);

  RoundLog log = evaluate_single(fed, next.round, next.models.weights.front());
  log.wall_time = std::chrono::steady_clock::now() - start;
  return {std::move(next), std::move(log)};
}

FedAvgResult run_fedavg(const Federation& fed, const ParamVector& init) {
  fed.check();
  if (fed.rounds < 1) throw std::invalid_argument("run_fedavg: T must be >= 1");
  if (init.size() != fed.train.front().dim()) throw std::invalid_argument("run_fedavg: init dimension mismatch");
  FedAvgResult result;
  FederationState state{0, ClusterModels{{init}}};
  result.snapshots.push_back(init);
  for (int t = 0; t < fed.rounds; ++t) {
    try {
      auto [next, log] = fedavg_round(fed, state);
      state = std::move(next);
      result.logs.push_back(std::move(log));
    } catch (DivergenceError& err) {
      err.set_round(t + 1);
      throw;
    }
    result.snapshots.push_back(state.models.weights.front());
  }
  result.model = state.models.weights.front();
  return result;
}

std::string_view to_string(InitStrategy s) {
  return s == InitStrategy::local_fit ? "local_fit" : "oracle_perturbed";
}

InitStrategy parse_init_strategy(std::string_view s) {
  if (s == "local_fit" || s == "local-fit") return InitStrategy::local_fit;
  if (s == "oracle_perturbed" || s == "oracle-perturbed") return InitStrategy::oracle_perturbed;
  throw ConfigError("init_strategy: expected local_fit or oracle_perturbed, got '" + std::string(s) + "'");
}

ClusterModels initialize_models(const Federation& fed, int num_clusters, const InitOptions& opts) {
  fed.check();
  if (num_clusters < 1) throw std::invalid_argument("initialize_models: M must be >= 1");
  const std::size_t d = fed.train.front().dim();
  ClusterModels models;

  if (opts.strategy == InitStrategy::oracle_perturbed) {
    if (opts.truth == nullptr || opts.truth->num_clusters() < num_clusters) {
      throw std::invalid_argument("oracle_perturbed init needs ground-truth centers for every cluster");
    }
    const double radius = opts.oracle_radius_factor * opts.truth->inter_distance;
    for (int m = 0; m < num_clusters; ++m) {
      RandomStream rng(fed.seed, StreamTag::init_models, opts.stream_index * 1024 + 512 + static_cast<std::uint64_t>(m));
      ParamVector dir(d);
      double n = 0.0;
      while (n == 0.0) {
        for (double& v : dir) v = rng.normal();
        n = norm(dir);
      }
      ParamVector w = opts.truth->centers[static_cast<std::size_t>(m)];
      axpy(radius / n, dir, w);
      models.weights.push_back(std::move(w));
    }
    return models;
  }

  const auto E = fed.train.size();
  if (static_cast<std::size_t>(num_clusters) > E) {
    throw ConfigError("num_clusters: local_fit init needs at least as many agents as clusters");
  }
  const ParamVector zero(d, 0.0);
  std::vector<ParamVector> fits(E);
  parallel_for(E, [&](std::size_t e) {
    fits[e] = local_sgd(zero, fed.train[e], fed.learning_rate, fed.local_steps, fed.model);
  });

  // loss[i][e]: agent e's training loss under agent i's fit.
  std::vector<Vector> loss(E, Vector(E));
  parallel_for(E, [&](std::size_t i) {
    for (std::size_t e = 0; e < E; ++e) loss[i][e] = empirical_loss(fed.model, fits[i], fed.train[e]);
  });

  auto chain_from = [&](std::size_t first) {
    std::vector<std::size_t> chosen{first};
    std::vector<double> min_dist(E, std::numeric_limits<double>::infinity());
    while (chosen.size() < static_cast<std::size_t>(num_clusters)) {
      const auto& last = fits[chosen.back()];
      std::size_t best = E;
      double best_dist = -1.0;
      for (std::size_t e = 0; e < E; ++e) {
        min_dist[e] = std::min(min_dist[e], squared_distance(fits[e], last));
        if (std::find(chosen.begin(), chosen.end(), e) != chosen.end()) continue;
        if (min_dist[e] > best_dist) {
          best_dist = min_dist[e];
          best = e;
        }
      }
      chosen.push_back(best);
    }
    return chosen;
  };

  // Every start agent yields a farthest-point chain; keep the chain whose
  // fits give the lowest total of each agent's best loss.
  std::vector<std::size_t> chosen;
  double best_objective = std::numeric_limits<double>::infinity();
  for (std::size_t first = 0; first < E; ++first) {
    const auto candidate = chain_from(first);
    double objective = 0.0;
    for (std::size_t e = 0; e < E; ++e) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i : candidate) best = std::min(best, loss[i][e]);
      objective += best;
    }
    if (objective < best_objective) {
      best_objective = objective;
      chosen = candidate;
    }
  }
  for (std::size_t idx : chosen) models.weights.push_back(fits[idx]);
  return models;
}

FedAvgResult run_fedavg(const Federation& fed) {
  const ClusterModels init = initialize_models(fed, 1, InitOptions{});
  return run_fedavg(fed, init.weights.front());
}

HardClusterResult run_fedavg_hardcluster(const Federation& fed, std::span<const int> assignment, int num_clusters) {
  fed.check();
  if (assignment.size() != fed.train.size()) throw std::invalid_argument("assignment length must equal agent count");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_clusters));
  for (std::size_t e = 0; e < assignment.size(); ++e) {
    const int m = assignment[e];
    if (m < 0 || m >= num_clusters) throw std::invalid_argument("assignment index out of range");
    members[static_cast<std::size_t>(m)].push_back(e);
  }
  for (int m = 0; m < num_clusters; ++m) {
    if (members[static_cast<std::size_t>(m)].empty()) {
      throw std::invalid_argument("empty cluster " + std::to_string(m));
    }
  }

  HardClusterResult result;
  result.assignment.assign(assignment.begin(), assignment.end());
  result.models.weights.resize(static_cast<std::size_t>(num_clusters));
  result.logs.resize(static_cast<std::size_t>(fed.rounds));
  for (int t = 0; t < fed.rounds; ++t) {
    auto& log = result.logs[static_cast<std::size_t>(t)];
    log.round = t + 1;
    log.per_agent_train_loss.assign(fed.train.size(), 0.0);
    log.per_agent_test_loss.assign(fed.train.size(), 0.0);
    log.model_snapshot_norms.assign(static_cast<std::size_t>(num_clusters), 0.0);
  }

  for (int m = 0; m < num_clusters; ++m) {
    const auto& ids = members[static_cast<std::size_t>(m)];
    std::vector<AgentDataset> sub_train, sub_test;
    for (std::size_t e : ids) {
      sub_train.push_back(fed.train[e]);
      if (!fed.test.empty()) sub_test.push_back(fed.test[e]);
    }
    Federation sub = fed;
    sub.train = sub_train;
    sub.test = sub_test;
    InitOptions opts;
    opts.stream_index = static_cast<std::uint64_t>(m);
    const ClusterModels init = initialize_models(sub, 1, opts);
    FedAvgResult run = run_fedavg(sub, init.weights.front());

    result.models.weights[static_cast<std::size_t>(m)] = run.model;
    for (int t = 0; t < fed.rounds; ++t) {
      auto& log = result.logs[static_cast<std::size_t>(t)];
      const auto& src = run.logs[static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        log.per_agent_train_loss[ids[i]] = src.per_agent_train_loss[i];
        log.per_agent_test_loss[ids[i]] = src.per_agent_test_loss[i];
      }
      log.model_snapshot_norms[static_cast<std::size_t>(m)] = src.model_snapshot_norms.front();
      log.wall_time += src.wall_time;
    }
  }
  return result;
}

double global_training_loss(const Federation& fed, std::span<const double> w) {
  double total_n = 0.0;
  for (const auto& a : fed.train) total_n += static_cast<double>(a.size());
  double loss = 0.0;
  for (const auto& a : fed.train) loss += static_cast<double>(a.size()) / total_n * empirical_loss(fed.model, w, a);
  return loss;
}

}  // namespace focusfl
